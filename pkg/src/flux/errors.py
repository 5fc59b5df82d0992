"""Exception hierarchy shared by every FLUX module.

Errors fall into three classes that the CLI maps to exit codes:
syntax errors (1), type errors (2) and runtime errors (3).
"""


class FluxError(Exception):
    """Base class for all FLUX diagnostics."""

    kind = "error"

    def __init__(self, message, span=None):
        super().__init__(message)
        self.message = message
        self.span = span

    def record(self):
        """Machine-readable form of the diagnostic."""
        rec = {"kind": self.kind, "message": self.message}
        rec["span"] = None if self.span is None else str(self.span)
        for key in ("expected", "found"):
            val = getattr(self, key, None)
            rec[key] = None if val is None else str(val)
        return rec


# ---------------------------------------------------------------- syntax


class FluxSyntaxError(FluxError):
    kind = "syntax"

    def __init__(self, message, line=0, column=0, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(sorted(set(expected)))
        text = f"{line}:{column}: {message}"
        if self.expected:
            text += " (expected one of: " + ", ".join(self.expected) + ")"
        super().__init__(text, span=f"{line}:{column}")

    def record(self):
        rec = super().record()
        rec["expected"] = list(self.expected) or None
        return rec


class XMLFormatError(FluxSyntaxError):
    pass


# ------------------------------------------------------------------ type


class FluxTypeError(FluxError):
    kind = "type"

    def __init__(self, message, span=None, expected=None, found=None, rule=None):
        self.expected = expected
        self.found = found
        self.rule = rule
        super().__init__(message, span)


class UndeclaredTypeVar(FluxTypeError):
    def __init__(self, name, span=None):
        self.name = name
        super().__init__(f"undeclared type variable {name}", span)


class UnguardedTypeVar(FluxTypeError):
    def __init__(self, name, span=None):
        self.name = name
        super().__init__(
            f"type variable {name} occurs unguarded (not under an element) in a definition", span)


class SubtypeFailure(FluxTypeError):
    def __init__(self, found, expected, span=None, what="type"):
        super().__init__(f"{what} {found} is not a subtype of {expected}", span,
                         expected=expected, found=found, rule="subsumption")


class ArityError(FluxTypeError):
    pass


class UnknownProcedure(FluxTypeError):
    def __init__(self, name, span=None):
        self.name = name
        super().__init__(f"unknown procedure {name}", span)


class PathTypeError(FluxTypeError):
    pass


class NonAtomicSimpleUpdate(FluxTypeError):
    pass


class DomainOverlap(FluxTypeError):
    pass


class DomainMismatch(FluxTypeError):
    pass


class UnknownLabel(FluxError):
    kind = "usage"

    def __init__(self, label):
        self.label = label
        super().__init__(f"no subexpression carries location {label}")


# --------------------------------------------------------------- runtime


class FluxRuntimeError(FluxError):
    kind = "runtime"


class UnboundVariable(FluxRuntimeError):
    def __init__(self, name, span=None):
        self.name = name
        super().__init__(f"unbound variable ${name}", span)


class ConditionNotBool(FluxRuntimeError):
    pass


class StrEqNonString(FluxRuntimeError):
    pass


class Stuck(FluxRuntimeError):
    """No evaluation rule applies. ``focus`` is the index trail from the root."""

    def __init__(self, reason, focus=(), span=None):
        self.reason = reason
        self.focus = tuple(focus)
        where = "/" + "/".join(str(i) for i in self.focus)
        super().__init__(f"stuck: {reason} at focus {where}", span)


class UnboundProcedure(FluxRuntimeError):
    def __init__(self, name, span=None):
        self.name = name
        super().__init__(f"unbound procedure {name}", span)


class FuelExhausted(FluxRuntimeError):
    def __init__(self, fuel):
        self.fuel = fuel
        super().__init__(f"step budget of {fuel} rule applications exhausted")
