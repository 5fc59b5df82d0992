"""Reading and writing documents.

Two formats are accepted: a restricted XML dialect (elements and text
only) and the native value syntax ``a[b[], "text"]``. Output is either
compact XML or the native syntax; both are byte-stable.
"""
from __future__ import annotations

from xml.parsers import expat

from .data_model import Bool, Element, Text
from .errors import XMLFormatError


def parse_xml(text: str):
    """Parse an XML document into a forest.

    Attributes, comments, processing instructions and DOCTYPEs are
    rejected. Text consisting only of whitespace is dropped.
    """
    parser = expat.ParserCreate()
    stack = [[]]
    buf = []

    def where():
        return parser.CurrentLineNumber, parser.CurrentColumnNumber + 1

    def fail(msg):
        raise XMLFormatError(msg, *where())

    def flush():
        if buf:
            s = "".join(buf)
            buf.clear()
            if s.strip():
                stack[-1].append(Text(s))

    def start(name, attrs):
        if attrs:
            fail(f"attributes are not supported (element <{name}>)")
        flush()
        stack.append([name])

    def end(name):
        flush()
        frame = stack.pop()
        stack[-1].append(Element(frame[0], tuple(frame[1:])))

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = buf.append
    parser.CommentHandler = lambda _: fail("comments are not supported")
    parser.ProcessingInstructionHandler = lambda *_: fail("processing instructions are not supported")
    parser.StartDoctypeDeclHandler = lambda *_: fail("DOCTYPE declarations are not supported")
    try:
        parser.Parse(text.encode("utf-8"), True)
    except expat.ExpatError as err:
        raise XMLFormatError(expat.ErrorString(err.code), err.lineno, err.offset + 1) from None
    return tuple(stack[0])


def _escape(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_xml(v) -> str:
    """Compact XML for a forest; booleans are written as text."""
    out = []

    def go(t):
        if isinstance(t, Text):
            out.append(_escape(t.text))
        elif isinstance(t, Bool):
            out.append("true" if t.value else "false")
        elif t.children:
            out.append(f"<{t.label}>")
            for ch in t.children:
                go(ch)
            out.append(f"</{t.label}>")
        else:
            out.append(f"<{t.label}/>")

    for t in v:
        go(t)
    return "".join(out)


def looks_like_xml(text: str) -> bool:
    return text.lstrip().startswith("<")


def read_document(text: str):
    """Parse either format, chosen by the first non-blank character."""
    if looks_like_xml(text):
        return parse_xml(text)
    from .syntax import parse_value
    return parse_value(text)
