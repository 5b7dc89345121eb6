"""Fixed computational box, transverse parity bases and parity-tagged fields.

Transverse collocation points are zeta_j = j/N (j = 0..N), the same for
every family. Cosine fields use cos(k pi zeta), k = 0..N; sine fields use
sin(k pi zeta), k = 1..N-1 and vanish on the walls. Coefficient arrays keep
the full k = 0..N index for both families; the unused sine slots stay zero.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ParityError

PARITIES = ("cc", "sc", "cs", "ss")


def _bits(parity):
    if parity not in PARITIES:
        raise ParityError(f"unknown parity class {parity!r}")
    return int(parity[0] == "s"), int(parity[1] == "s")


def _code(b2, b3):
    return ("c", "s")[b2] + ("c", "s")[b3]


def parity_mul(p, q):
    a, b = _bits(p), _bits(q)
    return _code(a[0] ^ b[0], a[1] ^ b[1])


def parity_flip(p, axis):
    b = list(_bits(p))
    b[axis] ^= 1
    return _code(*b)


class Basis1D:
    """Cosine/sine tables on [0, 1] with N intervals; `length` maps to the physical
    transverse coordinate (2 theta0 or 2)."""

    def __init__(self, N, length):
        if N < 2:
            raise ValueError("need at least two transverse intervals")
        self.N, self.length = N, float(length)
        k = np.arange(N + 1)
        self.k = k
        self.zeta = k / N
        self.C = self.cos_table(self.zeta)
        self.S = self.sin_table(self.zeta)
        self.S[[0, N], :] = 0.0
        self.Ca = np.linalg.inv(self.C)
        self.Sa = np.zeros_like(self.S)
        self.Sa[1:N, 1:N] = np.linalg.inv(self.S[1:N, 1:N])
        w = k * np.pi / self.length
        self.wavenumber = w
        self.sin_mask = (k >= 1) & (k <= N - 1)
        # value-space differentiation: cos family -> sin family and back
        self.Dc = self.S @ np.diag(-w) @ self.Ca
        self.Ds = self.C @ np.diag(w) @ self.Sa

    def cos_table(self, zeta):
        return np.cos(np.pi * np.outer(zeta, self.k))

    def sin_table(self, zeta):
        t = np.sin(np.pi * np.outer(zeta, self.k))
        t[:, 0] = 0.0
        t[:, self.N] = 0.0
        return t

    def synth(self, odd):
        return self.S if odd else self.C

    def anal(self, odd):
        return self.Sa if odd else self.Ca

    def table(self, odd, zeta):
        return self.sin_table(zeta) if odd else self.cos_table(zeta)

    def dmat(self, odd):
        return self.Ds if odd else self.Dc

    def filter_mask(self, frac=2.0 / 3.0):
        return (self.k <= frac * self.N).astype(float)


_D4_END = np.array([[-25.0, 48.0, -36.0, 16.0, -3.0],
                    [-3.0, -10.0, 18.0, -6.0, 1.0]]) / 12.0


def radial_derivative(values, h):
    """Fourth-order first derivative along axis 0 on a uniform grid.

    Five-point central stencil inside, five-point one-sided stencils at the
    two stations next to each end. Needs at least five stations.
    """
    f = np.asarray(values, dtype=float)
    n = f.shape[0]
    if n < 5:
        raise ValueError("radial derivative needs at least five stations")
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / 12.0
    head = np.tensordot(_D4_END, f[:5], axes=(1, 0))
    tail = np.tensordot(_D4_END, f[::-1][:5], axes=(1, 0))
    d[0], d[1] = head[0], head[1]
    d[-1], d[-2] = -tail[0], -tail[1]
    return d / h


def _along(mat, arr, axis):
    """Apply a square matrix along `axis` (-2 or -1) of arr."""
    if axis == -1:
        return arr @ mat.T
    return np.einsum("ij,...jk->...ik", mat, arr)


@dataclass(frozen=True)
class SpectralGrid:
    N1: int
    N2: int
    N3: int
    theta0: float
    rs: float
    r2: float

    @cached_property
    def y1(self):
        return np.linspace(self.rs, self.r2, self.N1)

    @property
    def h(self):
        return (self.r2 - self.rs) / (self.N1 - 1)

    @cached_property
    def b2(self):
        return Basis1D(self.N2, 2.0 * self.theta0)

    @cached_property
    def b3(self):
        return Basis1D(self.N3, 2.0)

    @property
    def y2(self):
        return -self.theta0 + 2.0 * self.theta0 * self.b2.zeta

    @property
    def y3(self):
        return -1.0 + 2.0 * self.b3.zeta

    def zeta_of(self, y2):
        return (np.asarray(y2) + self.theta0) / (2.0 * self.theta0)

    def eta_of(self, y3):
        return (np.asarray(y3) + 1.0) / 2.0

    @property
    def shape(self):
        return (self.N1, self.N2 + 1, self.N3 + 1)

    @property
    def eshape(self):
        return (self.N2 + 1, self.N3 + 1)

    def r_col(self):
        return self.y1[:, None, None]

    def refined(self, k=1):
        f = 2 ** k
        return SpectralGrid((self.N1 - 1) * f + 1, self.N2 * f, self.N3 * f,
                            self.theta0, self.rs, self.r2)

    # transforms on the last two axes
    def analyze(self, values, parity):
        o2, o3 = _bits(parity)
        c = _along(self.b2.anal(o2), np.asarray(values, dtype=float), -2)
        return _along(self.b3.anal(o3), c, -1)

    def synthesize(self, coeffs, parity):
        o2, o3 = _bits(parity)
        v = _along(self.b2.synth(o2), np.asarray(coeffs, dtype=float), -2)
        return _along(self.b3.synth(o3), v, -1)

    def project(self, values, parity):
        return self.synthesize(self.analyze(values, parity), parity)

    def mode_mask(self, parity):
        o2, o3 = _bits(parity)
        m2 = self.b2.sin_mask if o2 else np.ones(self.N2 + 1, bool)
        m3 = self.b3.sin_mask if o3 else np.ones(self.N3 + 1, bool)
        return np.outer(m2, m3)

    def d2(self, values, parity):
        o2, _ = _bits(parity)
        return _along(self.b2.dmat(o2), values, -2), parity_flip(parity, 0)

    def d3(self, values, parity):
        _, o3 = _bits(parity)
        return _along(self.b3.dmat(o3), values, -1), parity_flip(parity, 1)

    def d1(self, values):
        return radial_derivative(values, self.h)

    def eigen(self):
        """Transverse wavenumbers alpha_k (theta) and beta_k (x3)."""
        return self.b2.wavenumber, self.b3.wavenumber

    def eval_points(self, coeffs, parity, y2, y3):
        """Synthesis of a 2D coefficient array at scattered transverse points."""
        o2, o3 = _bits(parity)
        T2 = self.b2.table(o2, self.zeta_of(np.ravel(y2)))
        T3 = self.b3.table(o3, self.eta_of(np.ravel(y3)))
        out = np.einsum("pa,ab,pb->p", T2, coeffs, T3)
        return out.reshape(np.shape(y2))

    def filter(self, values, parity, frac=2.0 / 3.0):
        c = self.analyze(values, parity)
        mask = np.outer(self.b2.filter_mask(frac), self.b3.filter_mask(frac))
        return self.synthesize(c * mask, parity)

    def parity_defect(self, values, parity):
        """Largest wall value of a sine-family direction (zero for valid data)."""
        o2, o3 = _bits(parity)
        v = np.asarray(values)
        d = 0.0
        if o2:
            d = max(d, float(np.max(np.abs(v[..., [0, -1], :]))))
        if o3:
            d = max(d, float(np.max(np.abs(v[..., :, [0, -1]]))))
        return d


@dataclass
class ModalField:
    """Values on the collocation grid plus a fixed parity class.

    Arrays may be 3D (radial stations first) or 2D (fields on the front).
    Arithmetic tracks parity; plain numpy arrays and scalars count as
    even-even (they only depend on the radius).
    """
    grid: SpectralGrid
    parity: str
    values: np.ndarray
    defect: float = field(default=0.0)

    # let numpy arrays on the left defer to the reflected operators
    __array_ufunc__ = None

    def __post_init__(self):
        _bits(self.parity)
        self.values = np.asarray(self.values, dtype=float)

    @classmethod
    def from_values(cls, grid, values, parity, project=True):
        values = np.asarray(values, dtype=float)
        if not project:
            return cls(grid, parity, values)
        d = grid.parity_defect(values, parity)
        return cls(grid, parity, grid.project(values, parity), d)

    @classmethod
    def from_coeffs(cls, grid, coeffs, parity):
        return cls(grid, parity, grid.synthesize(coeffs, parity))

    @classmethod
    def zeros(cls, grid, parity, surface=False):
        return cls(grid, parity, np.zeros(grid.eshape if surface else grid.shape))

    @property
    def coeffs(self):
        return self.grid.analyze(self.values, self.parity) * self.grid.mode_mask(self.parity)

    def d1(self):
        return ModalField(self.grid, self.parity, self.grid.d1(self.values))

    def d2(self):
        v, p = self.grid.d2(self.values, self.parity)
        return ModalField(self.grid, p, v)

    def d3(self):
        v, p = self.grid.d3(self.values, self.parity)
        return ModalField(self.grid, p, v)

    def at(self, i):
        """Radial station i as a field on the front set."""
        return ModalField(self.grid, self.parity, self.values[i])

    def sup(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def copy(self):
        return ModalField(self.grid, self.parity, self.values.copy(), self.defect)

    def apply(self, fn):
        if self.parity != "cc":
            raise ParityError("nonlinear functions need an even-even argument")
        return ModalField(self.grid, "cc", fn(self.values))

    def check_parity(self):
        return self.grid.parity_defect(self.values, self.parity)

    # arithmetic
    def _split(self, other):
        if isinstance(other, ModalField):
            return other.values, other.parity
        return np.asarray(other, dtype=float), "cc"

    def __add__(self, other):
        v, p = self._split(other)
        if p != self.parity:
            if np.all(v == 0):
                return self
            if np.all(self.values == 0):
                return ModalField(self.grid, p, np.broadcast_to(v, np.broadcast_shapes(v.shape, self.values.shape)).copy() + 0 * self.values)
            raise ParityError(f"cannot add {self.parity} and {p}")
        return ModalField(self.grid, p, self.values + v)

    __radd__ = __add__

    def __neg__(self):
        return ModalField(self.grid, self.parity, -self.values)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        v, p = self._split(other)
        return ModalField(self.grid, parity_mul(self.parity, p), self.values * v)

    __rmul__ = __mul__

    def __truediv__(self, other):
        v, p = self._split(other)
        if p != "cc":
            raise ParityError("division only by even-even fields")
        return ModalField(self.grid, self.parity, self.values / v)

    def __rtruediv__(self, other):
        if self.parity != "cc":
            raise ParityError("division only by even-even fields")
        v, p = self._split(other)
        return ModalField(self.grid, p, v / self.values)

    def __pow__(self, n):
        if n == 2:
            return self * self
        return self.apply(lambda x: x ** n)
