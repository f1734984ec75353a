"""Built-in example descriptors with ready-to-run scenarios.

Every entry is referenced by name from the command line and the acceptance
suite:

* ``ambient_h3``          -- H^3(-1) itself, stationary under the hyperbolic flow;
* ``circle_h2``           -- the geodesic circle {x_3 = 2} in H^2, collapse at ln 2;
* ``horocycle_h2``        -- the horocycle <x, (1,0,-1)> = 1, eternal, one ideal point;
* ``equidistant_h2``      -- the equidistant curve {x_1 = 1}, relaxing onto a geodesic;
* ``geodesic_sphere_h3``  -- the geodesic sphere at distance arccosh 2 in H^3;
* ``tube_h3``             -- H^1(-2) x S^1(1) in H^3, a full product tube;
* ``clifford_tube_h5``    -- H^1(-5) x S^1(3) x S^1(1) in H^5;
* ``circle_in_h4_nested`` -- the circle included through two geodesic H^(m-1) steps.
"""

from __future__ import annotations

from .descriptors import (
    Ambient,
    EuclideanIso,
    FullProduct,
    ProductOfSpheres,
    Umbilic,
    derive_umbilic,
)


def _circle_h2() -> Umbilic:
    return Umbilic(
        derive_umbilic((0.0, 0.0, -1.0), 2.0),
        ProductOfSpheres(((1, 3.0),)),
    )


def _catalog() -> dict:
    circle = _circle_h2()
    nested_once = Umbilic(derive_umbilic((1.0, 0.0, 0.0, 0.0), 0.0), circle)
    return {
        "ambient_h3": Ambient(3),
        "circle_h2": circle,
        "horocycle_h2": Umbilic(
            derive_umbilic((1.0, 0.0, -1.0), 1.0),
            EuclideanIso(flat_dim=1),
        ),
        "equidistant_h2": Umbilic(
            derive_umbilic((1.0, 0.0, 0.0), 1.0),
            Ambient(1),
        ),
        "geodesic_sphere_h3": Umbilic(
            derive_umbilic((0.0, 0.0, 0.0, -1.0), 2.0),
            ProductOfSpheres(((2, 3.0),)),
        ),
        "tube_h3": FullProduct(1, 2.0, ProductOfSpheres(((1, 1.0),))),
        "clifford_tube_h5": FullProduct(1, 5.0, ProductOfSpheres(((1, 3.0), (1, 1.0)))),
        "circle_in_h4_nested": Umbilic(
            derive_umbilic((1.0, 0.0, 0.0, 0.0, 0.0), 0.0),
            nested_once,
        ),
    }


CATALOG = _catalog()


def catalog_names() -> list[str]:
    return sorted(CATALOG)


def catalog_descriptor(name: str):
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(catalog_names())}") from None
