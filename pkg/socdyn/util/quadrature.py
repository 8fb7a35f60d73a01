import math
from typing import Callable, List, Tuple
import unittest

from socdyn.exc import QuadratureError

# Ref: Godfrey's coefficients for the Lanczos approximation with g=7 and 9 terms.
_LANCZOS_G = 7
_LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def lanczos_gamma(z: float) -> float:
    """Return Γ(z) for real z by the Lanczos approximation, using reflection below 1/2."""
    if z < 0.5:
        return math.pi / (math.sin(math.pi * z) * lanczos_gamma(1 - z))
    z -= 1
    series = _LANCZOS_COEFFICIENTS[0]
    for i, coefficient in enumerate(_LANCZOS_COEFFICIENTS[1:], start=1):
        series += coefficient / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * t ** (z + 0.5) * math.exp(-t) * series


def adaptive_simpson(func: Callable[[float], float], a: float, b: float, tol: float = 1e-12,
                     max_depth: int = 50) -> float:
    """Integrate a smooth scalar function over [a, b] by adaptive Simpson quadrature.

    Intervals are refined until the Richardson estimate of the local error is below the tolerance allotted to them.
    The absolute error of the result is then approximately bounded by `tol`.

    :raises socdyn.exc.QuadratureError: if an interval needs refinement beyond `max_depth` halvings.
    """
    if a == b:
        return 0.
    fa, fb = func(a), func(b)
    m = (a + b) / 2
    fm = func(m)
    whole = (b - a) * (fa + 4 * fm + fb) / 6
    # Work items: (a, b, fa, fm, fb, whole, tol, depth)
    stack: List[Tuple[float, float, float, float, float, float, float, int]] = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = 0.
    while stack:
        a, b, fa, fm, fb, whole, tol, depth = stack.pop()
        m = (a + b) / 2
        lm, rm = (a + m) / 2, (m + b) / 2
        flm, frm = func(lm), func(rm)
        left = (m - a) * (fa + 4 * flm + fm) / 6
        right = (b - m) * (fm + 4 * frm + fb) / 6
        delta = left + right - whole
        if abs(delta) <= 15 * tol:
            total += left + right + delta / 15
        elif depth >= max_depth:
            raise QuadratureError(f'Adaptive Simpson did not converge on [{a}, {b}] within {max_depth} halvings.')
        else:
            stack.append((a, m, fa, flm, fm, left, tol / 2, depth + 1))
            stack.append((m, b, fm, frm, fb, right, tol / 2, depth + 1))
    return total


class TestLanczosGamma(unittest.TestCase):

    def test_integers(self):
        for k in range(1, 15):
            self.assertAlmostEqual(lanczos_gamma(k) / math.factorial(k - 1), 1., places=13)

    def test_against_math_gamma(self):
        for z in (0.1, 0.25, 0.5, 0.75, 1.25, 3.7, 10.5):
            self.assertLess(abs(lanczos_gamma(z) / math.gamma(z) - 1), 1e-13)


class TestAdaptiveSimpson(unittest.TestCase):

    def test_polynomial_exact(self):
        self.assertAlmostEqual(adaptive_simpson(lambda x: x ** 3 - x + 1, -1., 2.), 3.75, places=12)

    def test_gaussian_mass(self):
        value = adaptive_simpson(lambda x: math.exp(-x * x / 2), -10., 10., tol=1e-13)
        self.assertAlmostEqual(value, math.sqrt(2 * math.pi), places=11)

    def test_empty_interval(self):
        self.assertEqual(adaptive_simpson(math.exp, 1., 1.), 0.)


if __name__ == '__main__':
    unittest.main()
