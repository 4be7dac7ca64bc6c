"""Quasiperiodic chain models: hopping kernels, rational approximants of the
inverse golden ratio, and dense Hamiltonian assembly.

Every model is a one-dimensional tight-binding chain whose bond amplitudes are
the product of a distance kernel f_r and a cosine modulation
F_x = sum_s f_s cos(tau*s*pi*x) evaluated at the bond phase x.  Bonds are
enumerated as (n, n+r) for n = 1..N; the phase argument is always the
unwrapped sum x = 2n + r, so a wrapped bond (N, 1) carries the phase of its
periodic image (N, N+1).  With tau = p/N this choice makes the Fourier dual
of the chain land exactly on the partner model with the two kernel roles
exchanged (see duality module).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

# inverse golden ratio, the modulation frequency approximated by p/q
TAU_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# Fib(92) is the largest Fibonacci number below 2**63; beyond this the
# approximant no longer fits the int64 arithmetic used in assembly.
MAX_FIBONACCI_INDEX = 92


class Boundary(enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


class LimitFlag(enum.Enum):
    NONE = "none"
    A_INFINITY = "a-infinity"   # distance kernel collapsed to unit nearest-neighbor
    B_INFINITY = "b-infinity"   # modulation collapsed to a single cosine


class KernelFamily(enum.Enum):
    POWER_LAW = "power-law"
    EXPONENTIAL = "exponential"
    OFFDIAG_AAH = "offdiag-aah"
    DIAGONAL_AAH = "diagonal-aah"
    CUSTOM = "custom"


@dataclass(frozen=True)
class TauApproximant:
    """Rational approximant p/q of the inverse golden ratio from consecutive
    Fibonacci numbers, p = Fib(u-1), q = Fib(u)."""

    p: int
    q: int
    u: int

    def __post_init__(self):
        if self.p <= 0 or self.q <= 0:
            raise ValueError("p and q must be positive")
        if self.p >= self.q:
            raise ValueError("approximant requires p < q")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"p/q = {self.p}/{self.q} is not reduced")

    @property
    def value(self) -> float:
        return self.p / self.q

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


def _fibonacci(k: int) -> int:
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


def fibonacci_tau(u: int) -> TauApproximant:
    """Approximant Fib(u-1)/Fib(u) of the inverse golden ratio.

    Raises for u < 3 and for u beyond the int64-safe range (no silent
    wraparound in downstream integer phase arithmetic).
    """
    if u < 3:
        raise ValueError("Fibonacci index must be at least 3")
    if u > MAX_FIBONACCI_INDEX:
        raise ValueError(
            f"Fibonacci index {u} exceeds {MAX_FIBONACCI_INDEX}; "
            "Fib(u) would overflow 64-bit integer arithmetic"
        )
    return TauApproximant(p=_fibonacci(u - 1), q=_fibonacci(u), u=u)


@dataclass(frozen=True)
class HoppingKernel:
    """Kernel weights f_1..f_d plus the family tag that generated them.

    The same kernel type serves both roles in a model: as the distance decay
    f_|m-n| and, through the cosine series, as the modulation F_x.
    """

    family: KernelFamily
    d: int
    exponent: float | None = None       # power-law decay
    rate: float | None = None           # exponential decay
    amplitude: float | None = None      # off-diagonal AAH bond scale
    hopping: float | None = None        # diagonal AAH t
    potential: float | None = None      # diagonal AAH V
    table: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("kernel range d must be >= 1")
        if self.family is KernelFamily.CUSTOM:
            if self.table is None or len(self.table) != self.d:
                raise ValueError("custom kernel needs exactly d table values")
            if not all(math.isfinite(v) for v in self.table):
                raise ValueError("custom kernel values must be finite")

    @classmethod
    def power_law(cls, exponent: float, d: int) -> "HoppingKernel":
        return cls(family=KernelFamily.POWER_LAW, d=d, exponent=float(exponent))

    @classmethod
    def exponential(cls, rate: float, d: int) -> "HoppingKernel":
        return cls(family=KernelFamily.EXPONENTIAL, d=d, rate=float(rate))

    @classmethod
    def off_diagonal_aah(cls, amplitude: float) -> "HoppingKernel":
        return cls(family=KernelFamily.OFFDIAG_AAH, d=1, amplitude=float(amplitude))

    @classmethod
    def diagonal_aah(cls, hopping: float, potential: float) -> "HoppingKernel":
        return cls(
            family=KernelFamily.DIAGONAL_AAH,
            d=1,
            hopping=float(hopping),
            potential=float(potential),
        )

    @classmethod
    def custom(cls, values) -> "HoppingKernel":
        table = tuple(float(v) for v in values)
        return cls(family=KernelFamily.CUSTOM, d=len(table), table=table)

    def weights(self) -> np.ndarray:
        """Kernel values f_1..f_d; zero beyond d by construction."""
        s = np.arange(1, self.d + 1, dtype=float)
        if self.family is KernelFamily.POWER_LAW:
            return s ** (-self.exponent)
        if self.family is KernelFamily.EXPONENTIAL:
            return np.exp(-self.rate * s)
        if self.family is KernelFamily.OFFDIAG_AAH:
            return np.array([self.amplitude])
        if self.family is KernelFamily.DIAGONAL_AAH:
            return np.array([self.hopping])
        return np.asarray(self.table, dtype=float)


def _unit_nn_kernel() -> HoppingKernel:
    return HoppingKernel.custom((1.0,))


@dataclass(frozen=True)
class ModelSpec:
    """Full parametrization of one Hamiltonian instance."""

    distance_kernel: HoppingKernel
    modulation_kernel: HoppingKernel
    size: int
    tau: TauApproximant
    boundary: Boundary = Boundary.PERIODIC
    limit: LimitFlag = LimitFlag.NONE

    def __post_init__(self):
        if self.size < 2:
            raise ValueError("chain needs at least 2 sites")
        d = self.range
        if d >= self.size / 2:
            raise ValueError(
                f"hopping range d={d} must be below N/2={self.size / 2} "
                "(periodic wrap would be ambiguous)"
            )
        if self.limit is LimitFlag.NONE:
            if self.distance_kernel.d != self.modulation_kernel.d:
                raise ValueError(
                    "distance and modulation kernels must share the same range "
                    "unless a limit flag is set"
                )
        elif self.limit is LimitFlag.A_INFINITY:
            if self.distance_kernel.d != 1:
                raise ValueError("a-infinity limit requires a unit nearest-neighbor distance kernel")
        elif self.limit is LimitFlag.B_INFINITY:
            if self.modulation_kernel.d != 1:
                raise ValueError("b-infinity limit requires a single-harmonic modulation kernel")
        if self.boundary is Boundary.PERIODIC and self.size % self.tau.q != 0:
            raise ValueError(
                f"periodic boundary requires q | N, got q={self.tau.q}, N={self.size}"
            )

    @property
    def range(self) -> int:
        return max(self.distance_kernel.d, self.modulation_kernel.d)

    @property
    def is_nearest_neighbor(self) -> bool:
        return self.distance_kernel.d == 1

    @property
    def has_onsite(self) -> bool:
        return self.distance_kernel.family is KernelFamily.DIAGONAL_AAH

    # -- constructors for the named model families ------------------------

    @classmethod
    def power_law(cls, a, b, d: int, tau: TauApproximant, size: int | None = None,
                  boundary: Boundary = Boundary.PERIODIC) -> "ModelSpec":
        """Power-law model with exponents (a, b); either may be None for the
        corresponding infinite-exponent limiting model."""
        N = tau.q if size is None else size
        if a is None and b is None:
            raise ValueError("at most one of a, b may be infinite")
        if a is None:
            return cls(_unit_nn_kernel(), HoppingKernel.power_law(b, d), N, tau,
                       boundary, LimitFlag.A_INFINITY)
        if b is None:
            return cls(HoppingKernel.power_law(a, d), _unit_nn_kernel(), N, tau,
                       boundary, LimitFlag.B_INFINITY)
        return cls(HoppingKernel.power_law(a, d), HoppingKernel.power_law(b, d),
                   N, tau, boundary, LimitFlag.NONE)

    @classmethod
    def exponential(cls, a, b, d: int, tau: TauApproximant, size: int | None = None,
                    boundary: Boundary = Boundary.PERIODIC) -> "ModelSpec":
        N = tau.q if size is None else size
        if a is None:
            return cls(_unit_nn_kernel(), HoppingKernel.exponential(b, d), N, tau,
                       boundary, LimitFlag.A_INFINITY)
        if b is None:
            return cls(HoppingKernel.exponential(a, d), _unit_nn_kernel(), N, tau,
                       boundary, LimitFlag.B_INFINITY)
        return cls(HoppingKernel.exponential(a, d), HoppingKernel.exponential(b, d),
                   N, tau, boundary, LimitFlag.NONE)

    @classmethod
    def off_diagonal_aah(cls, a: float, b: float, tau: TauApproximant,
                         size: int | None = None,
                         boundary: Boundary = Boundary.PERIODIC) -> "ModelSpec":
        N = tau.q if size is None else size
        return cls(HoppingKernel.off_diagonal_aah(a), HoppingKernel.off_diagonal_aah(b),
                   N, tau, boundary, LimitFlag.NONE)

    @classmethod
    def diagonal_aah(cls, hopping: float, potential: float, tau: TauApproximant,
                     size: int | None = None,
                     boundary: Boundary = Boundary.PERIODIC) -> "ModelSpec":
        """Textbook AAH chain (calibration model; not generated by the cosine series)."""
        N = tau.q if size is None else size
        k = HoppingKernel.diagonal_aah(hopping, potential)
        return cls(k, k, N, tau, boundary, LimitFlag.NONE)


def _cos_phase(p: int, q: int, s: int, x: np.ndarray | int) -> np.ndarray | float:
    """cos(tau*s*pi*x) for tau = p/q with exact integer reduction mod 2q.

    The product p*s*x is reduced stepwise so every intermediate stays below
    (2q)**2, keeping int64 arithmetic exact.
    """
    m = 2 * q
    ps = (p * s) % m
    xr = np.mod(x, m)
    phase = np.mod(ps * xr, m)
    return np.cos(np.pi * phase / q)


def modulation_F(kernel: HoppingKernel, tau: TauApproximant, x: int) -> float:
    """Modulation F_x = sum_{s=1}^{d} f_s cos(tau*s*pi*x) at integer phase x."""
    if kernel.family is KernelFamily.DIAGONAL_AAH:
        raise ValueError("diagonal AAH kernel has no cosine-series modulation")
    w = kernel.weights()
    total = 0.0
    for s in range(1, kernel.d + 1):
        total += w[s - 1] * _cos_phase(tau.p, tau.q, s, x)
    return float(total)


def _modulation_array(kernel: HoppingKernel, tau: TauApproximant, x: np.ndarray) -> np.ndarray:
    w = kernel.weights()
    out = np.zeros(len(x), dtype=float)
    for s in range(1, kernel.d + 1):
        out += w[s - 1] * _cos_phase(tau.p, tau.q, s, x)
    return out


def build_hamiltonian(spec: ModelSpec) -> np.ndarray:
    """Dense real symmetric N x N Hamiltonian of a model spec.

    Entries are assembled bond-by-bond: H[n, n+r] = f_r * F_{2n+r} for
    r = 1..d, with open boundary dropping the bonds that would wrap.
    The diagonal is zero except for the diagonal-AAH calibration model.
    """
    N = spec.size
    H = np.zeros((N, N))
    idx = np.arange(N)
    n = np.arange(1, N + 1, dtype=np.int64)

    if spec.has_onsite:
        t = spec.distance_kernel.hopping
        V = spec.distance_kernel.potential
        bonds = np.full(N, t)
        if spec.boundary is Boundary.PERIODIC:
            cols = (idx + 1) % N
            H[idx, cols] += bonds
            H[cols, idx] += bonds
        else:
            H[idx[:-1], idx[1:] % N] += bonds[:-1]
            H[idx[1:], idx[:-1]] += bonds[:-1]
        # onsite cosine at frequency 2*pi*tau*n, i.e. phase x = 2n
        H[idx, idx] = V * _cos_phase(spec.tau.p, spec.tau.q, 1, 2 * n)
        return H

    dist_w = spec.distance_kernel.weights()
    for r in range(1, spec.distance_kernel.d + 1):
        fr = dist_w[r - 1]
        if fr == 0.0:
            continue
        x = 2 * n + r
        amp = fr * _modulation_array(spec.modulation_kernel, spec.tau, x)
        if spec.boundary is Boundary.PERIODIC:
            cols = (idx + r) % N
            H[idx, cols] += amp
            H[cols, idx] += amp
        else:
            keep = N - r
            H[idx[:keep], idx[:keep] + r] += amp[:keep]
            H[idx[:keep] + r, idx[:keep]] += amp[:keep]
    return H


def nearest_neighbor_parts(spec: ModelSpec) -> tuple[np.ndarray, np.ndarray, float]:
    """Compact (diagonal, off-diagonal, wrap) arrays for nearest-neighbor specs.

    Returns the N onsite energies, the N-1 bulk bond amplitudes t_1..t_{N-1},
    and the wrap bond t_N (zero for open boundary).  Rejects specs with
    hopping range above 1.
    """
    if not spec.is_nearest_neighbor:
        raise ValueError("spec is not a nearest-neighbor model")
    N = spec.size
    n = np.arange(1, N + 1, dtype=np.int64)
    if spec.has_onsite:
        diag = spec.distance_kernel.potential * _cos_phase(spec.tau.p, spec.tau.q, 1, 2 * n)
        bonds = np.full(N, spec.distance_kernel.hopping)
    else:
        diag = np.zeros(N)
        f1 = spec.distance_kernel.weights()[0]
        bonds = f1 * _modulation_array(spec.modulation_kernel, spec.tau, 2 * n + 1)
    wrap = float(bonds[-1]) if spec.boundary is Boundary.PERIODIC else 0.0
    return diag, bonds[:-1], wrap


def bond_sequence(spec: ModelSpec) -> np.ndarray:
    """Bond amplitudes t_n on (n, n+1) for n = 1..N of a nearest-neighbor spec.

    t_N is the periodic closure bond; the transfer-matrix recursion uses the
    full cyclic sequence regardless of the Hamiltonian boundary.
    """
    if not spec.is_nearest_neighbor:
        raise ValueError("bond sequence is defined for nearest-neighbor models only")
    N = spec.size
    if spec.has_onsite:
        return np.full(N, spec.distance_kernel.hopping)
    n = np.arange(1, N + 1, dtype=np.int64)
    f1 = spec.distance_kernel.weights()[0]
    return f1 * _modulation_array(spec.modulation_kernel, spec.tau, 2 * n + 1)


def onsite_sequence(spec: ModelSpec) -> np.ndarray:
    """Onsite energies v_n; zero except for the diagonal-AAH calibration model."""
    N = spec.size
    n = np.arange(1, N + 1, dtype=np.int64)
    if spec.has_onsite:
        return spec.distance_kernel.potential * _cos_phase(spec.tau.p, spec.tau.q, 1, 2 * n)
    return np.zeros(N)


def write_matrix_text(H: np.ndarray, path) -> None:
    """Dense text export: one row per line, full-precision decimals."""
    with open(path, "w") as fh:
        for row in H:
            fh.write(" ".join(repr(float(v)) for v in row))
            fh.write("\n")


def read_matrix_text(path) -> np.ndarray:
    with open(path) as fh:
        rows = [[float(v) for v in line.split()] for line in fh if line.strip()]
    return np.array(rows)
