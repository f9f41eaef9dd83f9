"""Discrete-time selective state-space layer.

The recurrence is

    x_t = diag(a_t) x_{t-1} + B_t u_t
    y_t = C_t x_t + D u_t

where every matrix except D is conditioned on the current input u_t:

    a_t = sigmoid(base_a + gate_a @ u_t)          (diagonal, always in (0, 1))
    B_t = b0 + outer(wb @ u_t, 1)                 (shared column shift)
    C_t = c0 + outer(1, wc @ u_t)                 (shared row shift)

All trainable scalars live in one flat float64 vector; the named blocks
below are reshaped views into it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, InputError

#: Order of parameter blocks inside the flat vector.
BLOCKS = ("base_a", "gate_a", "b0", "wb", "c0", "wc", "d")


A_LOGIT_MAX = 30.0


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


def logit(p):
    p = np.asarray(p, dtype=np.float64)
    return np.log(p) - np.log1p(-p)


def block_shapes(n_state: int, n_in: int, n_out: int) -> dict[str, tuple[int, ...]]:
    return {
        "base_a": (n_state,),
        "gate_a": (n_state, n_in),
        "b0": (n_state, n_in),
        "wb": (n_state, n_in),
        "c0": (n_out, n_state),
        "wc": (n_state, n_in),
        "d": (n_out, n_in),
    }


def block_offsets(n_state: int, n_in: int, n_out: int) -> dict[str, slice]:
    offsets, start = {}, 0
    for name, shape in block_shapes(n_state, n_in, n_out).items():
        size = int(np.prod(shape))
        offsets[name] = slice(start, start + size)
        start += size
    return offsets


def param_count(n_state: int, n_in: int, n_out: int) -> int:
    return sum(int(np.prod(s)) for s in block_shapes(n_state, n_in, n_out).values())


@dataclass
class SsmParams:
    """Flat trainable vector plus dimensions; block views via ``block(name)``."""

    n_state: int
    n_in: int
    n_out: int
    theta: np.ndarray = field(repr=False)

    def __post_init__(self):
        if min(self.n_state, self.n_in, self.n_out) < 1:
            raise ContractViolation("n_state, n_in and n_out must all be >= 1")
        expected = param_count(self.n_state, self.n_in, self.n_out)
        if self.theta.shape != (expected,):
            raise ContractViolation(
                f"theta has shape {self.theta.shape}, expected ({expected},)")
        self._slices = block_offsets(self.n_state, self.n_in, self.n_out)
        self._shapes = block_shapes(self.n_state, self.n_in, self.n_out)

    @property
    def size(self) -> int:
        return self.theta.size

    def block(self, name: str) -> np.ndarray:
        return self.theta[self._slices[name]].reshape(self._shapes[name])

    def slice_of(self, name: str) -> slice:
        return self._slices[name]

    @classmethod
    def zeros(cls, n_state: int, n_in: int, n_out: int) -> "SsmParams":
        return cls(n_state, n_in, n_out, np.zeros(param_count(n_state, n_in, n_out)))

    @classmethod
    def init(cls, n_state: int, n_in: int, n_out: int,
             rng: np.random.Generator) -> "SsmParams":
        """Decays log-spaced over [0.7, 0.99] at u = 0; fan-in uniform elsewhere."""
        p = cls.zeros(n_state, n_in, n_out)
        if n_state == 1:
            a0 = np.array([0.9])
        else:
            a0 = np.geomspace(0.7, 0.99, n_state)
        p.block("base_a")[:] = logit(a0)
        for name in ("gate_a", "b0", "wb", "wc", "d"):
            bound = 1.0 / np.sqrt(n_in)
            blk = p.block(name)
            blk[:] = rng.uniform(-bound, bound, size=blk.shape)
        bound = 1.0 / np.sqrt(n_state)
        p.block("c0")[:] = rng.uniform(-bound, bound, size=(n_out, n_state))
        return p

    def copy(self) -> "SsmParams":
        return SsmParams(self.n_state, self.n_in, self.n_out, self.theta.copy())


@dataclass(frozen=True)
class SsmState:
    x: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n_state: int) -> "SsmState":
        return cls(np.zeros(n_state), 0)


@dataclass(frozen=True)
class SsmMats:
    a_diag: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray


def _check_input(u, n_in: int) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (n_in,):
        raise ContractViolation(f"input has shape {u.shape}, expected ({n_in},)")
    if not np.all(np.isfinite(u)):
        raise InputError("input contains non-finite entries")
    return u


def selective_params(params: SsmParams, u) -> SsmMats:
    """Realize the input-conditioned matrices for one step."""
    u = _check_input(u, params.n_in)
    # Clamp the logit so float rounding cannot push a to exactly 0 or 1.
    a = sigmoid(np.clip(params.block("base_a") + params.block("gate_a") @ u,
                        -A_LOGIT_MAX, A_LOGIT_MAX))
    b = params.block("b0") + (params.block("wb") @ u)[:, None]
    c = params.block("c0") + (params.block("wc") @ u)[None, :]
    return SsmMats(a_diag=a, b=b, c=c, d=params.block("d").copy())


def ssm_step(state: SsmState, u, mats: SsmMats) -> tuple[SsmState, np.ndarray]:
    u = np.asarray(u, dtype=np.float64)
    n = mats.a_diag.shape[0]
    if state.x.shape != (n,) or mats.b.shape != (n, u.shape[0]) \
            or mats.c.shape[1] != n or mats.d.shape != (mats.c.shape[0], u.shape[0]):
        raise ContractViolation("state, input and matrices have inconsistent shapes")
    x = mats.a_diag * state.x + mats.b @ u
    y = mats.c @ x + mats.d @ u
    return SsmState(x, state.t + 1), y


def ssm_scan(params: SsmParams, inputs, x0: SsmState | None = None):
    """Run the layer over a sequence; returns a list of ``(state, y)`` pairs."""
    inputs = list(inputs)
    if not inputs:
        raise InputError("input sequence is empty")
    state = SsmState.zeros(params.n_state) if x0 is None else x0
    out = []
    for u in inputs:
        state, y = ssm_step(state, u, selective_params(params, u))
        out.append((state, y))
    return out
