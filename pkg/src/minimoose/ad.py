"""Forward-mode automatic differentiation over element-local degrees of freedom.

A :class:`Dual` carries a value array of any shape ``S`` and a derivative
array of shape ``S + (n,)``, where ``n`` is the number of active local DOFs.
Scalars are the degenerate case ``S == ()``; during assembly ``S`` is
``(n_elements, n_qp)`` so a whole chunk of elements is evaluated at once.

The value part is always computed with the same numpy expression as plain
real arithmetic, so it is bit-identical to a non-AD evaluation.
"""
from __future__ import annotations

import numpy as np

from .errors import CapacityError

DEFAULT_CAPACITY = 32


def _as_array(x):
    return np.asarray(x, dtype=float)


def _expand(der, shape):
    # broadcast a derivative array to value shape ``shape``
    target = tuple(shape) + der.shape[-1:]
    if der.shape == target:
        return der
    return np.broadcast_to(der, target)


class Dual:
    """Value plus derivative vector with respect to seeded local DOFs."""

    __slots__ = ("val", "der")
    __array_ufunc__ = None

    def __init__(self, val, der):
        self.val = _as_array(val)
        self.der = _as_array(der)
        if self.der.ndim < 1:
            raise ValueError("derivative array needs a trailing DOF axis")

    @property
    def n(self) -> int:
        return self.der.shape[-1]

    @property
    def shape(self):
        return self.val.shape

    @classmethod
    def constant(cls, val, n: int) -> "Dual":
        val = _as_array(val)
        return cls(val, np.zeros(val.shape + (n,)))

    def __repr__(self):
        return f"Dual({self.val!r}, {self.der!r})"

    def __getitem__(self, idx):
        return Dual(self.val[idx], self.der[idx])

    # arithmetic -----------------------------------------------------------------
    def __neg__(self):
        return Dual(-self.val, -self.der)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Dual):
            val = self.val + other.val
            return Dual(val, _expand(self.der, val.shape) + _expand(other.der, val.shape))
        if isinstance(other, DualVector):
            return NotImplemented
        val = self.val + _as_array(other)
        return Dual(val, _expand(self.der, val.shape).copy())

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            val = self.val - other.val
            return Dual(val, _expand(self.der, val.shape) - _expand(other.der, val.shape))
        if isinstance(other, DualVector):
            return NotImplemented
        val = self.val - _as_array(other)
        return Dual(val, _expand(self.der, val.shape).copy())

    def __rsub__(self, other):
        val = _as_array(other) - self.val
        return Dual(val, -_expand(self.der, val.shape))

    def __mul__(self, other):
        if isinstance(other, Dual):
            val = self.val * other.val
            der = self.val[..., None] * other.der + other.val[..., None] * self.der
            return Dual(val, _expand(der, val.shape))
        if isinstance(other, DualVector):
            return NotImplemented
        c = _as_array(other)
        val = self.val * c
        return Dual(val, _expand(c[..., None] * self.der, val.shape))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            val = self.val / other.val
            der = (self.der * other.val[..., None] - self.val[..., None] * other.der) / (
                other.val * other.val
            )[..., None]
            return Dual(val, _expand(der, val.shape))
        if isinstance(other, DualVector):
            return NotImplemented
        c = _as_array(other)
        val = self.val / c
        return Dual(val, _expand(self.der / c[..., None], val.shape))

    def __rtruediv__(self, other):
        c = _as_array(other)
        val = c / self.val
        der = -(c / (self.val * self.val))[..., None] * self.der
        return Dual(val, _expand(der, val.shape))

    def __pow__(self, other):
        if isinstance(other, Dual):
            val = self.val**other.val
            der = val[..., None] * (
                other.der * np.log(self.val)[..., None] + (other.val / self.val)[..., None] * self.der
            )
            return Dual(val, _expand(der, val.shape))
        p = _as_array(other)
        val = self.val**p
        der = (p * self.val ** (p - 1.0))[..., None] * self.der
        return Dual(val, _expand(der, val.shape))

    def __rpow__(self, other):
        c = _as_array(other)
        val = c**self.val
        return Dual(val, _expand((val * np.log(c))[..., None] * self.der, val.shape))

    def __abs__(self):
        return Dual(np.abs(self.val), np.sign(self.val)[..., None] * self.der)


class DualVector:
    """A ``dim``-valued dual (e.g. a solution gradient at quadrature points).

    ``val`` has shape ``S + (dim,)`` and ``der`` has shape ``S + (dim, n)``.
    """

    __slots__ = ("val", "der")
    __array_ufunc__ = None

    def __init__(self, val, der):
        self.val = _as_array(val)
        self.der = _as_array(der)

    @property
    def dim(self) -> int:
        return self.val.shape[-1]

    @property
    def n(self) -> int:
        return self.der.shape[-1]

    def __repr__(self):
        return f"DualVector({self.val!r}, {self.der!r})"

    def __getitem__(self, i) -> Dual:
        """Component ``i`` of the vector."""
        return Dual(self.val[..., i], self.der[..., i, :])

    def __neg__(self):
        return DualVector(-self.val, -self.der)

    def __add__(self, other):
        if isinstance(other, DualVector):
            val = self.val + other.val
            return DualVector(val, _expand(self.der, val.shape) + _expand(other.der, val.shape))
        val = self.val + _as_array(other)
        return DualVector(val, _expand(self.der, val.shape).copy())

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        """Scale by a Dual or a real array broadcast over the vector axis."""
        if isinstance(other, DualVector):
            return NotImplemented
        if isinstance(other, Dual):
            val = other.val[..., None] * self.val
            der = other.val[..., None, None] * self.der + self.val[..., None] * other.der[..., None, :]
            return DualVector(val, _expand(der, val.shape))
        c = _as_array(other)[..., None]
        val = c * self.val
        return DualVector(val, _expand(c[..., None] * self.der, val.shape))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            return self * (1.0 / other)
        return self * (1.0 / _as_array(other))

    def dot(self, other) -> Dual:
        if isinstance(other, DualVector):
            val = np.einsum("...d,...d->...", self.val, other.val)
            der = np.einsum("...d,...dn->...n", self.val, _expand(other.der, other.val.shape)) + np.einsum(
                "...d,...dn->...n", other.val, _expand(self.der, self.val.shape)
            )
            return Dual(val, der)
        c = _as_array(other)
        val = np.einsum("...d,...d->...", *np.broadcast_arrays(self.val, c))
        cb = np.broadcast_to(c, val.shape + (self.dim,))
        der = np.einsum("...d,...dn->...n", cb, _expand(self.der, val.shape + (self.dim,)))
        return Dual(val, der)

    def __matmul__(self, other):
        return self.dot(other)

    def __rmatmul__(self, other):
        return self.dot(other)

    def norm(self) -> Dual:
        return sqrt(self.dot(self))


# unary functions -----------------------------------------------------------------


def exp(a):
    if not isinstance(a, Dual):
        return np.exp(a)
    val = np.exp(a.val)
    return Dual(val, val[..., None] * a.der)


def log(a):
    if not isinstance(a, Dual):
        return np.log(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.log(a.val)
        return Dual(val, a.der / a.val[..., None])


def sqrt(a):
    if not isinstance(a, Dual):
        return np.sqrt(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.sqrt(a.val)
        return Dual(val, a.der / (2.0 * val)[..., None])


def tanh(a):
    if not isinstance(a, Dual):
        return np.tanh(a)
    val = np.tanh(a.val)
    return Dual(val, (1.0 - val * val)[..., None] * a.der)


def _select(a, b, take_a):
    av, bv = (x.val if isinstance(x, Dual) else _as_array(x) for x in (a, b))
    n = a.n if isinstance(a, Dual) else b.n
    ad = a.der if isinstance(a, Dual) else np.zeros(av.shape + (n,))
    bd = b.der if isinstance(b, Dual) else np.zeros(bv.shape + (n,))
    mask = take_a(av, bv)
    val = np.where(mask, av, bv)
    der = np.where(mask[..., None], _expand(ad, val.shape), _expand(bd, val.shape))
    return Dual(val, der)


def minimum(a, b):
    """Elementwise min; on ties the derivative of ``a`` is kept."""
    if not isinstance(a, Dual) and not isinstance(b, Dual):
        return np.minimum(a, b)
    return _select(a, b, lambda x, y: x <= y)


def maximum(a, b):
    """Elementwise max; on ties the derivative of ``a`` is kept."""
    if not isinstance(a, Dual) and not isinstance(b, Dual):
        return np.maximum(a, b)
    return _select(a, b, lambda x, y: x >= y)


def value_of(x):
    """Strip derivatives from a Dual/DualVector, pass reals through."""
    if isinstance(x, (Dual, DualVector)):
        return x.val
    return _as_array(x)


# seeding -------------------------------------------------------------------------


def seed_element_dofs(local_values, capacity: int = DEFAULT_CAPACITY) -> list[Dual]:
    """Seed each local value with a unit derivative vector ``e_i``."""
    values = [float(v) for v in local_values]
    n = len(values)
    if n > capacity:
        raise CapacityError(f"{n} local DOFs exceed derivative capacity {capacity}")
    eye = np.eye(n)
    return [Dual(v, eye[i]) for i, v in enumerate(values)]


def seed_batch(local_values, capacity: int = DEFAULT_CAPACITY, derivatives: bool = True) -> Dual:
    """Seed a ``(batch, L)`` array of local DOF values at once.

    With ``derivatives=False`` the derivative axis has length zero, which turns
    every downstream AD expression into a plain value computation.
    """
    local_values = _as_array(local_values)
    n = local_values.shape[-1]
    if n > capacity:
        raise CapacityError(f"{n} local DOFs exceed derivative capacity {capacity}")
    if not derivatives:
        return Dual(local_values, np.zeros(local_values.shape + (0,)))
    der = np.broadcast_to(np.eye(n), local_values.shape + (n,))
    return Dual(local_values, der)
