"""Second-order Taylor jets over a small set of named input directions.

A :class:`Jet2` holds a value together with its first and second partial
derivatives with respect to the tracked directions (``"t"`` and/or ``"x"``).
Values and coefficients may be Python floats, numpy arrays (one jet per
sample, fully vectorised) or other :class:`Jet2` objects, which gives
third and fourth derivatives by nesting (see :func:`nested_lift`).
"""
from __future__ import annotations

from itertools import combinations_with_replacement

import numpy as np

from .errors import UsageError

__all__ = [
    "Jet2",
    "jet_lift",
    "constant",
    "exp",
    "log",
    "sqrt",
    "tanh",
    "cosh",
    "sinh",
    "scale",
    "affine",
    "value_of",
    "nested_lift",
    "field",
]


def _pairs(dirs):
    return tuple(combinations_with_replacement(dirs, 2))


def _key(i, j, dirs):
    return (i, j) if dirs.index(i) <= dirs.index(j) else (j, i)


class Jet2:
    """Value plus first/second Taylor coefficients along ``dirs``.

    ``d[i]`` is the partial derivative along ``i``; ``dd[(i, j)]`` the second
    partial (stored once per unordered pair, ordered as in ``dirs``).
    """

    __slots__ = ("value", "d", "dd", "dirs")
    __array_ufunc__ = None  # make numpy arrays defer to the reflected operators

    def __init__(self, value, d, dd, dirs=None):
        self.dirs = tuple(d) if dirs is None else tuple(dirs)
        self.value = value
        self.d = dict(d)
        self.dd = dict(dd)

    def __repr__(self):
        return f"Jet2(value={self.value!r}, d={self.d!r}, dd={self.dd!r})"

    def second(self, i, j):
        return self.dd[_key(i, j, self.dirs)]

    # -- helpers -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet2):
            if other.dirs != self.dirs:
                raise UsageError(
                    f"jet direction mismatch: {self.dirs} vs {other.dirs}"
                )
            return other
        return None

    def _chain(self, f0, f1, f2):
        """Compose a scalar function with value/derivatives f0, f1, f2."""
        d = {i: f1 * self.d[i] for i in self.dirs}
        dd = {
            (i, j): f1 * self.dd[(i, j)] + f2 * self.d[i] * self.d[j]
            for (i, j) in self.dd
        }
        return Jet2(f0, d, dd, self.dirs)

    # -- arithmetic --------------------------------------------------------
    def __neg__(self):
        return Jet2(
            -self.value,
            {k: -v for k, v in self.d.items()},
            {k: -v for k, v in self.dd.items()},
            self.dirs,
        )

    def __pos__(self):
        return self

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return Jet2(self.value + other, self.d, self.dd, self.dirs)
        return Jet2(
            self.value + o.value,
            {k: self.d[k] + o.d[k] for k in self.d},
            {k: self.dd[k] + o.dd[k] for k in self.dd},
            self.dirs,
        )

    def __radd__(self, other):
        return Jet2(other + self.value, self.d, self.dd, self.dirs)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return Jet2(self.value - other, self.d, self.dd, self.dirs)
        return Jet2(
            self.value - o.value,
            {k: self.d[k] - o.d[k] for k in self.d},
            {k: self.dd[k] - o.dd[k] for k in self.dd},
            self.dirs,
        )

    def __rsub__(self, other):
        return (-self).__radd__(other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return Jet2(
                self.value * other,
                {k: v * other for k, v in self.d.items()},
                {k: v * other for k, v in self.dd.items()},
                self.dirs,
            )
        a, b = self, o
        d = {i: a.d[i] * b.value + a.value * b.d[i] for i in a.dirs}
        dd = {
            (i, j): a.dd[(i, j)] * b.value
            + a.d[i] * b.d[j]
            + a.d[j] * b.d[i]
            + a.value * b.dd[(i, j)]
            for (i, j) in a.dd
        }
        return Jet2(a.value * b.value, d, dd, a.dirs)

    def __rmul__(self, other):
        return Jet2(
            other * self.value,
            {k: other * v for k, v in self.d.items()},
            {k: other * v for k, v in self.dd.items()},
            self.dirs,
        )

    def reciprocal(self):
        r = 1.0 / self.value
        r2 = r * r
        return self._chain(r, -r2, 2.0 * r2 * r)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return self * (1.0 / other)
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        return other * self.reciprocal()

    def __pow__(self, p):
        if isinstance(p, Jet2):
            raise UsageError("jet exponents are not supported")
        if p == 2:
            return self * self
        v = self.value
        return self._chain(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    # -- elementary functions ----------------------------------------------
    def exp(self):
        e = exp(self.value)
        return self._chain(e, e, e)

    def log(self):
        r = 1.0 / self.value
        return self._chain(log(self.value), r, -r * r)

    def sqrt(self):
        s = sqrt(self.value)
        return self._chain(s, 0.5 / s, -0.25 / (s * self.value))

    def tanh(self):
        a = tanh(self.value)
        s = 1.0 - a * a
        return self._chain(a, s, -2.0 * a * s)

    def cosh(self):
        c, s = cosh(self.value), sinh(self.value)
        return self._chain(c, s, c)

    def sinh(self):
        c, s = cosh(self.value), sinh(self.value)
        return self._chain(s, c, s)


def _dispatch(name, npfunc):
    def f(a):
        if isinstance(a, Jet2):
            return getattr(a, name)()
        return npfunc(a)

    f.__name__ = name
    f.__doc__ = f"``{name}`` for floats, arrays and jets."
    return f


exp = _dispatch("exp", np.exp)
log = _dispatch("log", np.log)
sqrt = _dispatch("sqrt", np.sqrt)
tanh = _dispatch("tanh", np.tanh)
cosh = _dispatch("cosh", np.cosh)
sinh = _dispatch("sinh", np.sinh)


def scale(a, c):
    return a * c


def affine(a, c, b):
    return a * c + b


def value_of(a):
    """Strip jet structure down to the plain (float/array) value."""
    while isinstance(a, Jet2):
        a = a.value
    return a


def constant(value, dirs=("t", "x")):
    dirs = tuple(dirs)
    zero = 0.0 * value
    return Jet2(value, {i: zero for i in dirs}, {p: zero for p in _pairs(dirs)}, dirs)


def _seed(value, own, dirs, one=1.0, zero=0.0):
    d = {i: (one if i == own else zero) for i in dirs}
    return Jet2(value, d, {p: zero for p in _pairs(dirs)}, dirs)


def jet_lift(point, tracked=("t", "x")):
    """Lift ``(t, x, y)`` to jets tracking the directions in ``tracked``.

    The returned triple shares the direction set; ``t`` and ``x`` are seeded
    with unit derivative along their own direction when tracked, ``y`` is
    always passive (all coefficients zero).
    """
    if not set(tracked) <= {"t", "x"}:
        raise UsageError(f"tracked directions must be a subset of {{t, x}}, got {tracked}")
    tracked = tuple(d for d in ("t", "x") if d in set(tracked))
    t, x, y = point
    return (
        _seed(t, "t", tracked),
        _seed(x, "x", tracked),
        _seed(y, None, tracked),
    )


OUTER = ("T", "X")


def nested_lift(t, x, y):
    """Lift (t, x) to jets-of-jets for derivatives up to order four.

    The inner level tracks ``("t", "x")``, the outer level ``("T", "X")``.
    Use :func:`field` to read off derivative fields from a result.
    """
    tt, xx, _ = jet_lift((t, x, y), ("t", "x"))
    one = constant(1.0 + 0.0 * np.asarray(t, dtype=float))
    zero = constant(0.0 * np.asarray(t, dtype=float))
    return (
        _seed(tt, "T", OUTER, one, zero),
        _seed(xx, "X", OUTER, one, zero),
        y,
    )


_INNER = {
    "u": lambda j: j.value,
    "u_t": lambda j: j.d["t"],
    "u_x": lambda j: j.d["x"],
    "u_tt": lambda j: j.dd[("t", "t")],
    "u_tx": lambda j: j.dd[("t", "x")],
    "u_xx": lambda j: j.dd[("x", "x")],
}


def field(nested, name):
    """Project a nested jet to a single-level jet of one derivative field.

    ``field(U, "u_x")`` is the jet (over ``("t", "x")``) of u_x, i.e. carries
    u_x, u_xt, u_xx as value/first coefficients and third derivatives as
    second coefficients.
    """
    pick = _INNER[name]

    def p(c):
        if isinstance(c, Jet2):
            return pick(c)
        return c if name == "u" else 0.0 * c

    if not isinstance(nested, Jet2) or nested.dirs != OUTER:
        raise UsageError("field() expects an outer-level nested jet")
    return Jet2(
        p(nested.value),
        {"t": p(nested.d["T"]), "x": p(nested.d["X"])},
        {
            ("t", "t"): p(nested.dd[("T", "T")]),
            ("t", "x"): p(nested.dd[("T", "X")]),
            ("x", "x"): p(nested.dd[("X", "X")]),
        },
        ("t", "x"),
    )
