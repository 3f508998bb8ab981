"""Finite-depth ideal boundaries of pseudo-Anosov suspension flows.

Given a flow as Markov rectangle data (a .flowspec file), the package
builds finite balls of the universal-cover orbit space, approximates the
ideal circle boundary, glues it into a sphere quotient with its filling
curve, and analyses the boundary action of the deck group.
"""

__all__ = [
    "FlowSpec",
    "ValidationReport",
    "parse_flowspec",
    "serialize",
    "validate",
]

__version__ = "0.1.0"


def __getattr__(name):
    if name in __all__:
        from orbitsphere import flowspec

        return getattr(flowspec, name)
    raise AttributeError(name)
