"""Partial (exponential) Bell polynomials and Faa di Bruno helpers."""

from __future__ import annotations

from math import comb

from .errors import IndexOutOfRange


def bell_partial(l: int, j: int, args) -> float:
    """``B_{l,j}(x_1, ..., x_{l-j+1})`` via the standard recurrence.

    ``B_{l,j} = sum_{i=1}^{l-j+1} C(l-1, i-1) x_i B_{l-i, j-1}`` with
    ``B_{0,0} = 1`` and ``B_{l,0} = B_{0,j} = 0`` otherwise. Extra trailing
    arguments are ignored; too few raise :class:`IndexOutOfRange`.
    """
    if l < 0 or j < 0 or j > l:
        raise IndexOutOfRange(f"need 0 <= j <= l, got l={l}, j={j}")
    if l == 0:
        return 1.0
    if j == 0:
        return 0.0
    need = l - j + 1
    if len(args) < need:
        raise IndexOutOfRange(f"B_{{{l},{j}}} needs {need} arguments, got {len(args)}")
    return bell_table(l, args)[l][j]


def bell_table(n: int, args) -> list[list]:
    """Table ``B[m][k]`` of all partial Bell polynomials with ``m <= n``."""
    B = [[0.0] * (n + 1) for _ in range(n + 1)]
    B[0][0] = 1.0
    for m in range(1, n + 1):
        for k in range(1, m + 1):
            s = 0.0
            for i in range(1, m - k + 2):
                s += comb(m - 1, i - 1) * args[i - 1] * B[m - i][k - 1]
            B[m][k] = s
    return B


def inverse_derivatives(fprime: list, n: int) -> list:
    """Derivatives of an inverse function from those of the function.

    Given ``fprime = [f'(y), f''(y), ..., f^{(n)}(y)]`` at ``y = g(q)``, where
    ``g`` inverts ``f``, return ``[g'(q), ..., g^{(n)}(q)]``. Differentiating
    ``f(g(q)) = q`` with Faa di Bruno gives, for ``m >= 2``,
    ``g^{(m)} = -(1/f') sum_{k=2}^m f^{(k)} B_{m,k}(g', ..., g^{(m-k+1)})``.
    """
    g = [1.0 / fprime[0]]
    for m in range(2, n + 1):
        # the k = 1 term of B_{m,k} uses g^{(m)}, which is the unknown; pad with 0
        B = bell_table(m, g + [0.0])
        s = sum(fprime[k - 1] * B[m][k] for k in range(2, m + 1))
        g.append(-s / fprime[0])
    return g


def compose_derivatives(fprime: list, gprime: list, n: int) -> list:
    """``[(f o g)', ..., (f o g)^{(n)}]`` from derivatives of ``f`` at ``g(q)`` and of ``g`` at ``q``."""
    out = []
    for m in range(1, n + 1):
        B = bell_table(m, gprime)
        out.append(sum(fprime[k - 1] * B[m][k] for k in range(1, m + 1)))
    return out
