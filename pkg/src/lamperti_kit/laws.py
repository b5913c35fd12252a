"""Closed catalog of jump-size distributions.

Every law exposes a sampler and the matching closed-form moment generating
function m(u) = E[exp(<u, X>)] together with the open box of u on which m is
finite.  Sampler and mgf always read the same parameters, so Monte Carlo
estimates and spectral quantities refer to the same process.

The catalog is closed under summing coordinates over the blocks of a
partition (`sum_over_blocks`), which is what multiplicative agglomeration
needs: point masses and Gaussians map to their exact images, and independent
scalar components combine into an explicit convolution (`SumLaw`) whose mgf
is the product of the factors.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

__all__ = [
    "Law",
    "PointMass",
    "Gaussian",
    "TwoSidedExponential",
    "Zero",
    "IndependentProduct",
    "SumLaw",
    "law_from_descriptor",
]

_DOMAIN_EPS = 1e-12


def _as_vector(u, dim):
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (dim,):
        raise ValueError(f"argument has shape {u.shape}, law has dimension {dim}")
    return u


class Law:
    """Common interface: sampler, exact mgf, finiteness box, block sums."""

    dim: int

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Draw `size` independent variates, shape (size, dim); (dim,) if size is None."""
        raise NotImplementedError

    def mgf(self, u) -> float:
        """E[exp(<u, X>)]; raises DomainError when u is outside the finiteness box."""
        raise NotImplementedError

    def mgf_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Open box (lower, upper) of finiteness, componentwise; +-inf when unbounded."""
        return (np.full(self.dim, -np.inf), np.full(self.dim, np.inf))

    def in_domain(self, u) -> bool:
        u = _as_vector(u, self.dim)
        lo, hi = self.mgf_bounds()
        return bool(np.all(u > lo + _DOMAIN_EPS) and np.all(u < hi - _DOMAIN_EPS))

    def _require_domain(self, u):
        if not self.in_domain(u):
            raise DomainError(f"mgf argument {np.asarray(u)} outside finiteness domain of {self!r}")

    def mean(self) -> np.ndarray:
        raise NotImplementedError

    def sum_over_blocks(self, blocks: tuple[tuple[int, ...], ...]) -> "Law":
        """Law of the vector of block-wise coordinate sums."""
        raise NotImplementedError

    def to_descriptor(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.to_descriptor() == other.to_descriptor()

    def __hash__(self):  # descriptors are nested lists; identity hash is fine
        return id(self)


class PointMass(Law):
    """Degenerate law at a fixed point c; mgf exp(<u, c>)."""

    def __init__(self, value):
        self.value = np.atleast_1d(np.asarray(value, dtype=float))
        self.dim = self.value.shape[0]

    def sample(self, rng, size=None):
        if size is None:
            return self.value.copy()
        return np.broadcast_to(self.value, (size, self.dim)).copy()

    def mgf(self, u):
        u = _as_vector(u, self.dim)
        return float(np.exp(u @ self.value))

    def mean(self):
        return self.value.copy()

    def sum_over_blocks(self, blocks):
        return PointMass([self.value[list(b)].sum() for b in blocks])

    def to_descriptor(self):
        return {"type": "point_mass", "value": self.value.tolist()}

    def __repr__(self):
        return f"PointMass({self.value.tolist()})"


class Zero(Law):
    """Point mass at the origin, mgf identically 1."""

    def __init__(self, dim=1):
        self.dim = int(dim)

    def sample(self, rng, size=None):
        if size is None:
            return np.zeros(self.dim)
        return np.zeros((size, self.dim))

    def mgf(self, u):
        _as_vector(u, self.dim)
        return 1.0

    def mean(self):
        return np.zeros(self.dim)

    def sum_over_blocks(self, blocks):
        return Zero(len(blocks))

    def to_descriptor(self):
        return {"type": "zero", "dim": self.dim}

    def __repr__(self):
        return f"Zero(dim={self.dim})"


class Gaussian(Law):
    """Multivariate normal; mgf exp(<u, m> + u' S u / 2), finite everywhere."""

    def __init__(self, mean, cov):
        self.mu = np.atleast_1d(np.asarray(mean, dtype=float))
        self.dim = self.mu.shape[0]
        cov = np.asarray(cov, dtype=float)
        if cov.ndim == 0:
            cov = cov.reshape(1, 1)
        if cov.shape != (self.dim, self.dim):
            raise ValueError(f"covariance shape {cov.shape} does not match mean of length {self.dim}")
        self.cov = cov
        self._factor = psd_factor(cov)

    def sample(self, rng, size=None):
        n = 1 if size is None else size
        z = rng.standard_normal((n, self._factor.shape[1]))
        out = self.mu + z @ self._factor.T
        return out[0] if size is None else out

    def mgf(self, u):
        u = _as_vector(u, self.dim)
        return float(np.exp(u @ self.mu + 0.5 * u @ self.cov @ u))

    def mean(self):
        return self.mu.copy()

    def sum_over_blocks(self, blocks):
        m = block_sum_matrix(blocks, self.dim)
        return Gaussian(m @ self.mu, m @ self.cov @ m.T)

    def to_descriptor(self):
        return {"type": "gaussian", "mean": self.mu.tolist(), "cov": self.cov.tolist()}

    def __repr__(self):
        return f"Gaussian(mean={self.mu.tolist()}, cov={self.cov.tolist()})"


class TwoSidedExponential(Law):
    """Scalar mixture: Exp(rate_pos) with probability weight, -Exp(rate_neg) otherwise.

    mgf(u) = w * rp / (rp - u) + (1 - w) * rn / (rn + u), finite on the open
    interval (-rate_neg, rate_pos) (one side unbounded when its weight is 0).
    """

    def __init__(self, rate_pos, rate_neg, weight=0.5):
        if rate_pos <= 0 or rate_neg <= 0:
            raise ValueError("rates must be positive")
        if not 0.0 <= weight <= 1.0:
            raise ValueError("weight must lie in [0, 1]")
        self.rate_pos = float(rate_pos)
        self.rate_neg = float(rate_neg)
        self.weight = float(weight)
        self.dim = 1

    def sample(self, rng, size=None):
        n = 1 if size is None else size
        side = rng.random(n) < self.weight
        mag = rng.exponential(size=n)
        out = np.where(side, mag / self.rate_pos, -mag / self.rate_neg)
        out = out[:, None]
        return out[0] if size is None else out

    def mgf_bounds(self):
        lo = -self.rate_neg if self.weight < 1.0 else -np.inf
        hi = self.rate_pos if self.weight > 0.0 else np.inf
        return (np.array([lo]), np.array([hi]))

    def mgf(self, u):
        u = _as_vector(u, 1)
        self._require_domain(u)
        v = u[0]
        pos = self.weight * self.rate_pos / (self.rate_pos - v) if self.weight > 0 else 0.0
        neg = (1.0 - self.weight) * self.rate_neg / (self.rate_neg + v) if self.weight < 1 else 0.0
        return float(pos + neg)

    def mean(self):
        return np.array([self.weight / self.rate_pos - (1.0 - self.weight) / self.rate_neg])

    def sum_over_blocks(self, blocks):
        if blocks != ((0,),):
            raise ValueError("scalar law admits only the identity partition")
        return self

    def to_descriptor(self):
        return {
            "type": "two_sided_exp",
            "rate_pos": self.rate_pos,
            "rate_neg": self.rate_neg,
            "weight": self.weight,
        }

    def __repr__(self):
        return (
            f"TwoSidedExponential(rate_pos={self.rate_pos}, "
            f"rate_neg={self.rate_neg}, weight={self.weight})"
        )


class SumLaw(Law):
    """Sum of independent scalar laws; mgf is the product of the factor mgfs."""

    def __init__(self, parts):
        parts = list(parts)
        if not parts:
            raise ValueError("SumLaw needs at least one part")
        for p in parts:
            if p.dim != 1:
                raise ValueError("SumLaw combines scalar laws only")
        self.parts = parts
        self.dim = 1

    def sample(self, rng, size=None):
        total = self.parts[0].sample(rng, size)
        for p in self.parts[1:]:
            total = total + p.sample(rng, size)
        return total

    def mgf_bounds(self):
        los, his = zip(*(p.mgf_bounds() for p in self.parts))
        return (np.max(np.array(los), axis=0), np.min(np.array(his), axis=0))

    def mgf(self, u):
        u = _as_vector(u, 1)
        self._require_domain(u)
        out = 1.0
        for p in self.parts:
            out *= p.mgf(u)
        return float(out)

    def mean(self):
        return sum(p.mean() for p in self.parts)

    def sum_over_blocks(self, blocks):
        if blocks != ((0,),):
            raise ValueError("scalar law admits only the identity partition")
        return self

    def to_descriptor(self):
        return {"type": "sum", "components": [p.to_descriptor() for p in self.parts]}

    def __repr__(self):
        return f"SumLaw({self.parts!r})"


class IndependentProduct(Law):
    """Vector law with independent scalar components."""

    def __init__(self, components):
        components = list(components)
        for c in components:
            if c.dim != 1:
                raise ValueError("components must be scalar laws")
        self.components = components
        self.dim = len(components)

    def sample(self, rng, size=None):
        n = 1 if size is None else size
        cols = [c.sample(rng, n) for c in self.components]
        out = np.concatenate(cols, axis=1)
        return out[0] if size is None else out

    def mgf_bounds(self):
        los, his = zip(*(c.mgf_bounds() for c in self.components))
        return (np.concatenate(los), np.concatenate(his))

    def mgf(self, u):
        u = _as_vector(u, self.dim)
        self._require_domain(u)
        out = 1.0
        for c, v in zip(self.components, u):
            out *= c.mgf(np.array([v]))
        return float(out)

    def mean(self):
        return np.concatenate([c.mean() for c in self.components])

    def sum_over_blocks(self, blocks):
        new = []
        for block in blocks:
            parts = [self.components[j] for j in block]
            new.append(parts[0] if len(parts) == 1 else SumLaw(parts))
        return IndependentProduct(new)

    def to_descriptor(self):
        return {"type": "independent", "components": [c.to_descriptor() for c in self.components]}

    def __repr__(self):
        return f"IndependentProduct({self.components!r})"


def psd_factor(cov, floor=-1e-10):
    """Factor L with L L' = cov for a symmetric PSD matrix.

    Eigenvalues are allowed to dip to `floor` below zero (and are clipped);
    anything lower is a genuine invariant violation and raises.
    """
    cov = np.asarray(cov, dtype=float)
    if not np.allclose(cov, cov.T, atol=1e-12):
        raise ValueError("covariance must be symmetric")
    vals, vecs = np.linalg.eigh(cov)
    if vals.min() < floor:
        raise ValueError(f"covariance not PSD (eigenvalue {vals.min():.3g})")
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def block_sum_matrix(blocks, dim):
    """0/1 matrix mapping a d-vector to its block-wise sums."""
    m = np.zeros((len(blocks), dim))
    for i, block in enumerate(blocks):
        m[i, list(block)] = 1.0
    return m


def law_from_descriptor(desc: dict, dim: int | None = None) -> Law:
    """Rebuild a catalog law from its JSON descriptor."""
    kind = desc.get("type")
    if kind == "point_mass":
        return PointMass(desc["value"])
    if kind == "zero":
        return Zero(desc.get("dim", dim if dim is not None else 1))
    if kind == "gaussian":
        return Gaussian(desc["mean"], desc["cov"])
    if kind == "two_sided_exp":
        return TwoSidedExponential(desc["rate_pos"], desc["rate_neg"], desc.get("weight", 0.5))
    if kind == "sum":
        return SumLaw([law_from_descriptor(d) for d in desc["components"]])
    if kind == "independent":
        return IndependentProduct([law_from_descriptor(d) for d in desc["components"]])
    raise ValueError(f"unknown law descriptor type {kind!r}")
