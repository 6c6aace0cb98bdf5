import numpy as np

from ldgq import Material

Z = np.array([0.0, 0.0, 1.0])
X = np.array([1.0, 0.0, 0.0])
Y = np.array([0.0, 1.0, 0.0])


def mbba(elastic_l: float = 1.0, scale: float = 1.0) -> Material:
    """MBBA bulk constants; ``scale`` rescales the energy-density unit.

    The published constants are in J/m^3 (scale=1). The stationary points,
    characteristic temperatures, and norm bounds are invariant under a common
    rescaling of (alpha, b, c), so solver tests use scale=1e-3 (kJ/m^3) with
    unit grid spacing and a unit elastic constant to keep the flow
    well-conditioned.
    """
    return Material(
        alpha=0.42e3 * scale,
        b=0.64e4 * scale,
        c=0.35e4 * scale,
        t_star=45.0,
        elastic_l=elastic_l,
    )


def mbba_quartic_as_polynomial(m: Material, t: float):
    """The quartic density re-expressed under the polynomial interface."""
    from ldgq import Polynomial, a_of_temperature

    a = a_of_temperature(m, t)
    return Polynomial(a2=a / 2.0, terms=((0, 1, -m.b / 3.0), (2, 0, m.c / 4.0)))
