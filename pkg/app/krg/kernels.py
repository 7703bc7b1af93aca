"""
Edge-probability kernels f: [0,1]^2 -> [0,1] for kernel-based random graphs.

Every kernel is symmetric and vectorized: evaluate(x, y) broadcasts like a
numpy ufunc. Kernels round-trip through short spec strings used on the
command line and in generated sidecars:

    constant:0.3
    block:0.8,0.1,0.1,0.8            (equal-size blocks)
    block:0.8,0.1,0.1,0.8|0.3        (breakpoints after the bar)
    product:0.2,0.6                  (g(x) = a + b x, f = g(x) g(y))
    logistic:0.2,0.05                (f = 1 / (1 + exp((|x - y| - c) / s)))
"""

import math
from abc import ABC, abstractmethod
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit


class Kernel(ABC):
    kind: str = ""

    @abstractmethod
    def evaluate(self, x, y) -> np.ndarray:
        """Edge probability for latent features x, y (array-broadcasting)."""

    @abstractmethod
    def spec(self) -> str:
        """Spec string accepted by parse_kernel."""

    @property
    def is_constant(self) -> bool:
        return False

    @property
    def has_closed_form(self) -> bool:
        return False

    def matrix(self, xs, ys=None) -> np.ndarray:
        """len(xs) x len(ys) table of f values."""
        xs = np.asarray(xs, dtype=float)
        ys = xs if ys is None else np.asarray(ys, dtype=float)
        return self.evaluate(xs[:, None], ys[None, :])

    def spot_check(self, rng: np.random.Generator, pairs: int = 64) -> None:
        """Assert symmetry and range on random latent pairs."""
        x, y = rng.random(pairs), rng.random(pairs)
        fxy, fyx = self.evaluate(x, y), self.evaluate(y, x)
        assert np.allclose(fxy, fyx, rtol=0, atol=1e-15), f"{self.spec()} is not symmetric"
        assert np.all((fxy >= 0) & (fxy <= 1)), f"{self.spec()} left [0, 1]"

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.spec()!r})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Kernel) and self.spec() == other.spec()

    def __hash__(self) -> int:
        return hash(self.spec())


def _probability(value: float, what: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0 or math.isnan(value):
        raise ValueError(f"{what} must be a probability in [0, 1], got {value}")
    return value


class ConstantKernel(Kernel):
    """Erdos-Renyi: every pair joins with probability q."""

    kind = "constant"

    def __init__(self, q: float):
        self.q = _probability(q, "constant kernel value")

    def evaluate(self, x, y) -> np.ndarray:
        return np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, self.q)

    def spec(self) -> str:
        return f"constant:{self.q!r}"

    @property
    def is_constant(self) -> bool:
        return True

    @property
    def has_closed_form(self) -> bool:
        return True


class BlockKernel(Kernel):
    """
    Stochastic block model: [0, 1] is cut at the breakpoints into m blocks
    and f(x, y) = B[block(x), block(y)].
    """

    kind = "block"

    def __init__(self, matrix, breakpoints: Optional[Sequence[float]] = None):
        b = np.array(matrix, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] < 1:
            raise ValueError("block kernel matrix must be square")
        if not np.array_equal(b, b.T):
            raise ValueError("block kernel matrix must be symmetric")
        for value in b.ravel():
            _probability(value, "block kernel entry")
        m = b.shape[0]
        if breakpoints is None:
            cuts = np.arange(1, m) / m
        else:
            cuts = np.array(breakpoints, dtype=float)
            if cuts.shape != (m - 1,):
                raise ValueError(f"a {m}-block kernel needs {m - 1} breakpoints, got {cuts.size}")
            if np.any(cuts <= 0) or np.any(cuts >= 1) or np.any(np.diff(cuts) <= 0):
                raise ValueError("breakpoints must be increasing and strictly inside (0, 1)")
        b.setflags(write=False)
        cuts.setflags(write=False)
        self.B = b
        self.breakpoints = cuts
        self._explicit_breakpoints = breakpoints is not None

    @property
    def m(self) -> int:
        return self.B.shape[0]

    @property
    def weights(self) -> np.ndarray:
        """Lebesgue measure of each block."""
        return np.diff(np.concatenate([[0.0], self.breakpoints, [1.0]]))

    def block_of(self, x) -> np.ndarray:
        return np.searchsorted(self.breakpoints, np.asarray(x, dtype=float), side="right")

    def evaluate(self, x, y) -> np.ndarray:
        return self.B[self.block_of(x), self.block_of(y)]

    def spec(self) -> str:
        text = "block:" + ",".join(repr(float(v)) for v in self.B.ravel())
        if self._explicit_breakpoints:
            text += "|" + ",".join(repr(float(t)) for t in self.breakpoints)
        return text

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.B == self.B.flat[0]))

    @property
    def has_closed_form(self) -> bool:
        return True


class ProductKernel(Kernel):
    """f(x, y) = g(x) g(y) with g(x) = a + b x; g must stay within [0, 1]."""

    kind = "product"

    def __init__(self, a: float, b: float):
        self.a = _probability(a, "product kernel g(0) = a")
        self.b = float(b)
        _probability(self.a + self.b, "product kernel g(1) = a + b")

    def g(self, x) -> np.ndarray:
        return self.a + self.b * np.asarray(x, dtype=float)

    def evaluate(self, x, y) -> np.ndarray:
        return self.g(x) * self.g(y)

    def spec(self) -> str:
        return f"product:{self.a!r},{self.b!r}"

    @property
    def is_constant(self) -> bool:
        return self.b == 0.0

    @property
    def has_closed_form(self) -> bool:
        return True

    def power_mean(self, d: int) -> float:
        """E[g(X)^d] for X ~ U(0, 1)."""
        if self.b == 0.0:
            return self.a**d
        return ((self.a + self.b) ** (d + 1) - self.a ** (d + 1)) / (self.b * (d + 1))


class LogisticDistanceKernel(Kernel):
    """Latent-distance model: f(x, y) = 1 / (1 + exp((|x - y| - c) / s)), s > 0."""

    kind = "logistic"

    def __init__(self, c: float, s: float):
        self.c = float(c)
        self.s = float(s)
        if not math.isfinite(self.c):
            raise ValueError(f"logistic kernel center must be finite, got {c}")
        if not self.s > 0 or not math.isfinite(self.s):
            raise ValueError(f"logistic kernel scale must be positive, got {s}")

    def evaluate(self, x, y) -> np.ndarray:
        distance = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
        return expit((self.c - distance) / self.s)

    def spec(self) -> str:
        return f"logistic:{self.c!r},{self.s!r}"


def _numbers(text: str, what: str) -> list:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ValueError(f"{what} must be comma-separated numbers, got {text!r}")


def parse_kernel(text: str) -> Kernel:
    """Build a kernel from its spec string (see module docstring)."""
    kind, sep, body = text.strip().partition(":")
    kind = kind.strip().lower()
    if not sep or not body.strip():
        raise ValueError(f"kernel spec must look like 'kind:parameters', got {text!r}")

    if kind == "constant":
        values = _numbers(body, "constant kernel")
        if len(values) != 1:
            raise ValueError(f"constant kernel takes one value, got {len(values)}")
        return ConstantKernel(values[0])
    if kind == "block":
        entries, _, cuts = body.partition("|")
        values = _numbers(entries, "block kernel matrix")
        m = math.isqrt(len(values))
        if m * m != len(values) or m == 0:
            raise ValueError(f"block kernel needs m*m entries, got {len(values)}")
        breakpoints = _numbers(cuts, "block kernel breakpoints") if cuts.strip() else None
        return BlockKernel(np.reshape(values, (m, m)), breakpoints)
    if kind in ("product", "logistic"):
        values = _numbers(body, f"{kind} kernel")
        if len(values) != 2:
            raise ValueError(f"{kind} kernel takes two values, got {len(values)}")
        cls = ProductKernel if kind == "product" else LogisticDistanceKernel
        return cls(*values)
    raise ValueError(f"unknown kernel kind {kind!r}; use constant, block, product or logistic")
