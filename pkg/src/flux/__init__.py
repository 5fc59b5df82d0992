"""FLUX: a typed functional update language for XML.

Submodules:

* ``data_model``: tree and forest values
* ``type_algebra``: regular expression types, membership and subtyping
* ``query_lang``: the query language, its evaluator and type inference
* ``core_update`` / ``core_typing``: core update statements
* ``source_lang`` / ``source_typing``: the high-level update syntax
* ``path_error``: detection of dead subexpressions
* ``syntax``, ``xmlio``: concrete syntax and document formats
* ``cli``: the ``flux`` command
"""

__version__ = "0.1.0"
