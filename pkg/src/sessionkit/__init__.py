"""Toolkit for asynchronous binary session types.

Submodules:

- ``types``     rooted automata, duality, bisimilarity, fair termination
- ``lts``       labelled transitions in must/inductive/full modes, derivatives
- ``relations`` composability and the subtyping family, three-valued solver
- ``process``   the process calculus: surface syntax and terms
- ``runtime``   configurations, redexes, schedulers, simulation
- ``measures``  measure inference and type checking
- ``qm``        queue machines and their encoding into types
- ``randgen``   seeded random automata for stress corpora
- ``fixtures``  the built-in corpus of worked examples
- ``cli``       the ``kit`` command-line front end
"""

__version__ = "0.1.0"
