"""Numerical core: LSTM cell, one-layer tanh MLP, softmax cross-entropy,
SGD with L2, inverted dropout, and a central-difference gradient oracle.

Everything runs at float64. Parameters travel as flat ``{name: ndarray}``
dicts so the optimizer and the finite-difference checker stay agnostic of
which architecture produced them. Gate equations follow the standard
formulation: i, f, o sigmoid gates, tanh candidate, no peepholes:

    i = sigmoid(W_i x + U_i h + b_i)      f = sigmoid(W_f x + U_f h + b_f)
    o = sigmoid(W_o x + U_o h + b_o)      g = tanh(W_g x + U_g h + b_g)
    c' = f * c + i * g                    h' = o * tanh(c')
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NumericError, ShapeError

Array = np.ndarray

PROB_FLOOR = 1e-12
INIT_SCALE = 0.05  # uniform(-0.05, 0.05), same range as OOV embeddings
FORGET_BIAS = 1.0


def new_rng(seed: int) -> np.random.Generator:
    """Seeded generator; identical seed + call sequence gives identical streams."""
    return np.random.default_rng(seed)


def sigmoid(x: Array) -> Array:
    return 1.0 / (1.0 + np.exp(-x))


def _as_vector(name: str, v, dim: int | None = None) -> Array:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"{name} must be a vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ShapeError(f"{name} has length {v.shape[0]}, expected {dim}")
    return v


@dataclass
class LSTMCellParams:
    """Weights for one LSTM cell: gate matrices W_* (hidden x input),
    recurrent matrices U_* (hidden x hidden), biases b_* (hidden)."""

    W_i: Array
    W_f: Array
    W_o: Array
    W_g: Array
    U_i: Array
    U_f: Array
    U_o: Array
    U_g: Array
    b_i: Array
    b_f: Array
    b_o: Array
    b_g: Array

    @property
    def input_dim(self) -> int:
        return self.W_i.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.W_i.shape[0]

    def tensors(self) -> dict[str, Array]:
        return {
            "W_i": self.W_i, "W_f": self.W_f, "W_o": self.W_o, "W_g": self.W_g,
            "U_i": self.U_i, "U_f": self.U_f, "U_o": self.U_o, "U_g": self.U_g,
            "b_i": self.b_i, "b_f": self.b_f, "b_o": self.b_o, "b_g": self.b_g,
        }

    @classmethod
    def from_tensors(cls, t: dict[str, Array]) -> "LSTMCellParams":
        return cls(**{k: np.asarray(t[k], dtype=np.float64) for k in
                      ("W_i", "W_f", "W_o", "W_g", "U_i", "U_f", "U_o", "U_g",
                       "b_i", "b_f", "b_o", "b_g")})

    @classmethod
    def zeros(cls, input_dim: int, hidden_dim: int) -> "LSTMCellParams":
        w = lambda: np.zeros((hidden_dim, input_dim))
        u = lambda: np.zeros((hidden_dim, hidden_dim))
        b = lambda: np.zeros(hidden_dim)
        return cls(w(), w(), w(), w(), u(), u(), u(), u(), b(), b(), b(), b())

    @classmethod
    def init(cls, input_dim: int, hidden_dim: int,
             rng: np.random.Generator) -> "LSTMCellParams":
        """Uniform(-0.05, 0.05) weights; forget-gate bias starts at 1.0."""
        def w(shape):
            return rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)

        p = cls(
            w((hidden_dim, input_dim)), w((hidden_dim, input_dim)),
            w((hidden_dim, input_dim)), w((hidden_dim, input_dim)),
            w((hidden_dim, hidden_dim)), w((hidden_dim, hidden_dim)),
            w((hidden_dim, hidden_dim)), w((hidden_dim, hidden_dim)),
            w(hidden_dim), w(hidden_dim), w(hidden_dim), w(hidden_dim),
        )
        p.b_f = p.b_f * 0.0 + FORGET_BIAS
        return p


@dataclass
class LSTMState:
    h: Array
    c: Array

    @classmethod
    def zeros(cls, hidden_dim: int) -> "LSTMState":
        return cls(np.zeros(hidden_dim), np.zeros(hidden_dim))


@dataclass
class _StepCache:
    x: Array
    h_prev: Array
    c_prev: Array
    i: Array
    f: Array
    o: Array
    g: Array
    c: Array
    tanh_c: Array


def _step(params: LSTMCellParams, x: Array, prev: LSTMState) -> _StepCache:
    x = _as_vector("x", x, params.input_dim)
    h_prev = _as_vector("prev.h", prev.h, params.hidden_dim)
    c_prev = _as_vector("prev.c", prev.c, params.hidden_dim)
    i = sigmoid(params.W_i @ x + params.U_i @ h_prev + params.b_i)
    f = sigmoid(params.W_f @ x + params.U_f @ h_prev + params.b_f)
    o = sigmoid(params.W_o @ x + params.U_o @ h_prev + params.b_o)
    g = np.tanh(params.W_g @ x + params.U_g @ h_prev + params.b_g)
    c = f * c_prev + i * g
    tanh_c = np.tanh(c)
    return _StepCache(x, h_prev, c_prev, i, f, o, g, c, tanh_c)


def lstm_step(params: LSTMCellParams, x, prev: LSTMState) -> LSTMState:
    """One recurrence step; returns the new (h, c) state."""
    s = _step(params, x, prev)
    return LSTMState(s.o * s.tanh_c, s.c)


def lstm_run(params: LSTMCellParams, inputs: Sequence,
             init: LSTMState | None = None) -> tuple[list[Array], LSTMState]:
    """Run the cell over a sequence; returns (all hidden states, final state).

    An empty sequence returns ([], init) untouched.
    """
    state = init if init is not None else LSTMState.zeros(params.hidden_dim)
    hs: list[Array] = []
    for t, x in enumerate(inputs):
        try:
            state = lstm_step(params, x, state)
        except ShapeError as e:
            raise ShapeError(f"step {t}: {e}") from None
        hs.append(state.h)
    return hs, state


def lstm_forward(params: LSTMCellParams, inputs: Sequence,
                 init: LSTMState | None = None
                 ) -> tuple[list[Array], LSTMState, list[_StepCache]]:
    """Like lstm_run but keeps per-step caches for the backward pass."""
    state = init if init is not None else LSTMState.zeros(params.hidden_dim)
    hs: list[Array] = []
    caches: list[_StepCache] = []
    for t, x in enumerate(inputs):
        try:
            s = _step(params, x, state)
        except ShapeError as e:
            raise ShapeError(f"step {t}: {e}") from None
        state = LSTMState(s.o * s.tanh_c, s.c)
        hs.append(state.h)
        caches.append(s)
    return hs, state, caches


def lstm_grads_zeros(params: LSTMCellParams) -> dict[str, Array]:
    return {k: np.zeros_like(v) for k, v in params.tensors().items()}


def lstm_backward(params: LSTMCellParams, caches: list[_StepCache],
                  dh_steps: Sequence | None = None,
                  dh_final: Array | None = None,
                  dc_final: Array | None = None
                  ) -> tuple[dict[str, Array], list[Array], tuple[Array, Array]]:
    """Backprop through time over cached steps.

    dh_steps[t] is the gradient flowing into h_t from outside the recurrence
    (e.g. attention over all states); dh_final / dc_final flow into the last
    step's h and c (e.g. classifier input, or a downstream encoder seeded
    from this cell's memory). Returns (parameter grads, per-step input grads,
    gradient w.r.t. the initial state).
    """
    H = params.hidden_dim
    g = lstm_grads_zeros(params)
    dh_next = np.zeros(H) if dh_final is None else np.asarray(dh_final, dtype=np.float64).copy()
    dc_next = np.zeros(H) if dc_final is None else np.asarray(dc_final, dtype=np.float64).copy()
    dx: list[Array] = [None] * len(caches)  # type: ignore[list-item]
    for t in range(len(caches) - 1, -1, -1):
        s = caches[t]
        dh = dh_next
        if dh_steps is not None and dh_steps[t] is not None:
            dh = dh + dh_steps[t]
        do = dh * s.tanh_c
        dc = dc_next + dh * s.o * (1.0 - s.tanh_c ** 2)
        di = dc * s.g
        df = dc * s.c_prev
        dg = dc * s.i
        da_i = di * s.i * (1.0 - s.i)
        da_f = df * s.f * (1.0 - s.f)
        da_o = do * s.o * (1.0 - s.o)
        da_g = dg * (1.0 - s.g ** 2)
        g["W_i"] += np.outer(da_i, s.x)
        g["W_f"] += np.outer(da_f, s.x)
        g["W_o"] += np.outer(da_o, s.x)
        g["W_g"] += np.outer(da_g, s.x)
        g["U_i"] += np.outer(da_i, s.h_prev)
        g["U_f"] += np.outer(da_f, s.h_prev)
        g["U_o"] += np.outer(da_o, s.h_prev)
        g["U_g"] += np.outer(da_g, s.h_prev)
        g["b_i"] += da_i
        g["b_f"] += da_f
        g["b_o"] += da_o
        g["b_g"] += da_g
        dx[t] = (params.W_i.T @ da_i + params.W_f.T @ da_f
                 + params.W_o.T @ da_o + params.W_g.T @ da_g)
        dh_next = (params.U_i.T @ da_i + params.U_f.T @ da_f
                   + params.U_o.T @ da_o + params.U_g.T @ da_g)
        dc_next = dc * s.f
    return g, dx, (dh_next, dc_next)


def mlp_tanh(W: Array, b: Array, h) -> Array:
    """tanh(W h + b); output entries lie strictly inside (-1, 1)."""
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2:
        raise ShapeError(f"W must be a matrix, got shape {W.shape}")
    b = _as_vector("b", b, W.shape[0])
    h = _as_vector("h", h, W.shape[1])
    return np.tanh(W @ h + b)


def softmax(scores) -> Array:
    """Max-subtraction stabilized softmax; output sums to 1 within 1e-12."""
    scores = _as_vector("scores", scores)
    if scores.shape[0] == 0:
        raise DomainError("softmax of an empty score vector")
    if not np.all(np.isfinite(scores)):
        raise NumericError("softmax scores contain non-finite entries")
    e = np.exp(scores - np.max(scores))
    return e / e.sum()


def cross_entropy(predicted, true_class: int) -> float:
    """-ln(predicted[true_class]) with a 1e-12 probability floor."""
    predicted = _as_vector("predicted", predicted)
    if not 0 <= true_class < predicted.shape[0]:
        raise DomainError(
            f"true_class {true_class} out of range for {predicted.shape[0]} classes")
    return float(-np.log(max(float(predicted[true_class]), PROB_FLOOR)))


def sgd_step(params: dict[str, Array], grads: dict[str, Array],
             lr: float, l2: float) -> dict[str, Array]:
    """w <- w - lr * (g + l2 * w) for every tensor; returns new arrays."""
    if lr <= 0:
        raise DomainError(f"lr must be positive, got {lr}")
    if l2 < 0:
        raise DomainError(f"l2 must be nonnegative, got {l2}")
    out: dict[str, Array] = {}
    for name, w in params.items():
        if name not in grads:
            raise ShapeError(f"missing gradient for tensor {name}")
        g = grads[name]
        if np.shape(g) != np.shape(w):
            raise ShapeError(
                f"gradient for {name} has shape {np.shape(g)}, expected {np.shape(w)}")
        out[name] = w - lr * (g + l2 * w)
    return out


def dropout_mask(length: int, rate: float, rng: np.random.Generator) -> Array:
    """Inverted-dropout mask: 0 with probability rate, else 1/(1-rate)."""
    if not 0.0 <= rate < 1.0:
        raise DomainError(f"dropout rate must be in [0, 1), got {rate}")
    if rate == 0.0:
        return np.ones(length)
    keep = rng.random(length) >= rate
    return keep.astype(np.float64) / (1.0 - rate)


def finite_diff_grad(loss_fn: Callable[[dict[str, Array]], float],
                     params: dict[str, Array],
                     epsilon: float = 1e-5) -> dict[str, Array]:
    """Central differences (L(w+e) - L(w-e)) / 2e per scalar parameter.

    loss_fn must be deterministic (dropout off). This is the oracle the
    analytic gradients are checked against; it never shares code with them.
    """
    if epsilon <= 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    work = {k: np.array(v, dtype=np.float64, copy=True) for k, v in params.items()}
    grads = {k: np.zeros_like(v) for k, v in work.items()}
    for name, tensor in work.items():
        it = np.nditer(tensor, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = tensor[idx]
            tensor[idx] = orig + epsilon
            up = loss_fn(work)
            tensor[idx] = orig - epsilon
            down = loss_fn(work)
            tensor[idx] = orig
            if not (np.isfinite(up) and np.isfinite(down)):
                raise NumericError(f"non-finite loss at {name}{list(idx)}")
            grads[name][idx] = (up - down) / (2.0 * epsilon)
    return grads


def max_relative_error(analytic: dict[str, Array],
                       numeric: dict[str, Array]) -> dict[str, float]:
    """Per-tensor max of |a - n| / max(|a|, |n|, 1e-6).

    The 1e-6 floor keeps central-difference noise (~1e-11 absolute at
    eps=1e-5) from swamping the ratio where the true gradient is near zero.
    """
    out: dict[str, float] = {}
    for name in analytic:
        a = np.asarray(analytic[name], dtype=np.float64)
        n = np.asarray(numeric[name], dtype=np.float64)
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-6)
        out[name] = float(np.max(np.abs(a - n) / denom)) if a.size else 0.0
    return out
