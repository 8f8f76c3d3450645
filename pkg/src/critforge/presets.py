"""Named fixtures for the CLI."""

from .isotopy import example_automorphism, example_isotopy, hyperbolic_3cycle

PRESETS = {
    "cusp-stabilization": {
        "description": "x^3 on the line against x^3 + y^2 on the plane",
        "pairs": [(["x"], "x^3"), (["x", "y"], "x^3 + y^2")],
        "grams": ([[1]], []),
        "map": ["x", "y"],
    },
    "quadratic-point": {
        "description": "x^2 on the line against x^2 + y^2 on the plane",
        "pairs": [(["x"], "x^2"), (["x", "y"], "x^2 + y^2")],
        "grams": ([[1]], []),
        "map": ["x", "y"],
    },
    "quartic-automorphism": {
        "description": "f = x^3 + y^4 with x -> x + y^4, y -> y (1 - 3x^2 - 3xy^4 - y^8)^(1/4)",
        "pairs": [(["x", "y"], "x^3 + y^4")],
        "automorphism": example_automorphism,
    },
    "quartic-isotopy": {
        "description": "f = x^3 + y^4 with x -> x + t y^4, y -> y (1 - 3t x^2 - 3t^2 x y^4 - t^3 y^8)^(1/4)",
        "pairs": [(["x", "y"], "x^3 + y^4")],
        "family": example_isotopy,
    },
    "hyperbolic-3cycle": {
        "description": "[[1-t^3, t, 0], [0, 1-t^3, t], [t(3-3t^3+t^6), 0, 1-t^3]]",
        "matrix": hyperbolic_3cycle,
    },
}


def get(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}") from None
