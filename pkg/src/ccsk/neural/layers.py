"""Numpy layers with explicit backward passes.

Every ``*_forward`` returns ``(output, cache)`` and the matching
``*_backward`` takes ``(d_output, cache)`` and returns the input gradient plus
a dict of parameter gradients. Arrays are batch-first: ``(B, T, features)``.
"""

from __future__ import annotations

import numpy as np


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


# -- LSTM ---------------------------------------------------------------------
# Gate order in the stacked 4H axis: input, forget, cell candidate, output.
# Recurrent state is stored time-major (T, B, H) so each step is contiguous.


def lstm_forward(xs, Wx, Wh, b):
    B, T, I = xs.shape
    H = Wh.shape[0]
    xt = np.ascontiguousarray(xs.transpose(1, 0, 2))
    zx = (xt.reshape(T * B, I) @ Wx + b).reshape(T, B, 4 * H)
    gates = np.empty((T, B, 4 * H))
    cs = np.empty((T, B, H))
    tcs = np.empty((T, B, H))
    hs = np.empty((T, B, H))
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    for t in range(T):
        z = zx[t]
        z += h @ Wh
        g = gates[t]
        g[:, : 2 * H] = sigmoid(z[:, : 2 * H])
        np.tanh(z[:, 2 * H : 3 * H], out=g[:, 2 * H : 3 * H])
        g[:, 3 * H :] = sigmoid(z[:, 3 * H :])
        c = g[:, H : 2 * H] * c + g[:, :H] * g[:, 2 * H : 3 * H]
        cs[t] = c
        np.tanh(c, out=tcs[t])
        h = hs[t]
        np.multiply(g[:, 3 * H :], tcs[t], out=h)
    return hs.transpose(1, 0, 2), (xt, Wx, Wh, gates, cs, tcs, hs)


def lstm_backward(dhs, cache):
    xt, Wx, Wh, gates, cs, tcs, hs = cache
    T, B, H = hs.shape
    dht = np.ascontiguousarray(np.asarray(dhs).transpose(1, 0, 2))
    dz_all = np.empty((T, B, 4 * H))
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    zeros = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        g = gates[t]
        i, f, gg, o = g[:, :H], g[:, H : 2 * H], g[:, 2 * H : 3 * H], g[:, 3 * H :]
        c_prev = cs[t - 1] if t > 0 else zeros
        tc = tcs[t]
        dh = dht[t] + dh_next
        dc = dc_next + dh * o * (1.0 - tc * tc)
        dz = dz_all[t]
        dz[:, :H] = dc * gg * i * (1.0 - i)
        dz[:, H : 2 * H] = dc * c_prev * f * (1.0 - f)
        dz[:, 2 * H : 3 * H] = dc * i * (1.0 - gg * gg)
        dz[:, 3 * H :] = dh * tc * o * (1.0 - o)
        dh_next = dz @ Wh.T
        dc_next = dc * f
    I = xt.shape[2]
    dzf = dz_all.reshape(T * B, 4 * H)
    # h_prev for step t is hs[t-1]; step 0 starts from zero state.
    dWh = hs[:-1].reshape((T - 1) * B, H).T @ dz_all[1:].reshape((T - 1) * B, 4 * H)
    dWx = xt.reshape(T * B, I).T @ dzf
    db = dzf.sum(axis=0)
    dxs = (dzf @ Wx.T).reshape(T, B, I).transpose(1, 0, 2)
    return dxs, {"Wx": dWx, "Wh": dWh, "b": db}


def bilstm_forward(xs, p, prefix, final_only=False):
    """Bidirectional LSTM.

    Returns per-step features ``(B, T, 2H)`` or, with ``final_only``, the
    concatenated final states ``(B, 2H)`` (forward after the last step,
    backward after the first).
    """
    hf, cf = lstm_forward(xs, p[f"{prefix}.fwd.Wx"], p[f"{prefix}.fwd.Wh"], p[f"{prefix}.fwd.b"])
    hb, cb = lstm_forward(xs[:, ::-1], p[f"{prefix}.bwd.Wx"], p[f"{prefix}.bwd.Wh"], p[f"{prefix}.bwd.b"])
    if final_only:
        out = np.concatenate([hf[:, -1], hb[:, -1]], axis=-1)
    else:
        out = np.concatenate([hf, hb[:, ::-1]], axis=-1)
    return out, (cf, cb, final_only, hf.shape)


def bilstm_backward(dout, cache, prefix):
    cf, cb, final_only, (B, T, H) = cache
    if final_only:
        dhf = np.zeros((B, T, H))
        dhb = np.zeros((B, T, H))
        dhf[:, -1] = dout[:, :H]
        dhb[:, -1] = dout[:, H:]
    else:
        dhf = dout[..., :H]
        dhb = dout[..., H:][:, ::-1]
    dxf, gf = lstm_backward(dhf, cf)
    dxb, gb = lstm_backward(dhb, cb)
    grads = {f"{prefix}.fwd.{k}": v for k, v in gf.items()}
    grads.update({f"{prefix}.bwd.{k}": v for k, v in gb.items()})
    return dxf + dxb[:, ::-1], grads


# -- multi-head scaled dot-product self-attention -----------------------------


def attention_forward(A, p, heads, prefix="attn"):
    B, T, _ = A.shape
    Wq, Wk, Wv, Wo = (p[f"{prefix}.W{n}"] for n in "qkvo")
    D = Wq.shape[1]
    dh = D // heads
    scale = 1.0 / np.sqrt(dh)

    def split(x):
        return x.reshape(B, T, heads, dh).transpose(0, 2, 1, 3)

    Q = split(A @ Wq + p[f"{prefix}.bq"])
    K = split(A @ Wk + p[f"{prefix}.bk"])
    V = split(A @ Wv + p[f"{prefix}.bv"])
    S = (Q @ K.transpose(0, 1, 3, 2)) * scale
    S -= S.max(axis=-1, keepdims=True)
    P = np.exp(S)
    P /= P.sum(axis=-1, keepdims=True)
    C = (P @ V).transpose(0, 2, 1, 3).reshape(B, T, D)
    out = C @ Wo + p[f"{prefix}.bo"]
    return out, (A, Q, K, V, P, C, heads, scale)


def attention_backward(dout, p, cache, prefix="attn"):
    A, Q, K, V, P, C, heads, scale = cache
    B, T, Din = A.shape
    D = C.shape[-1]
    dh = D // heads
    Wq, Wk, Wv, Wo = (p[f"{prefix}.W{n}"] for n in "qkvo")
    flat = dout.reshape(B * T, -1)
    grads = {
        f"{prefix}.Wo": C.reshape(B * T, D).T @ flat,
        f"{prefix}.bo": flat.sum(axis=0),
    }
    dC = (dout @ Wo.T).reshape(B, T, heads, dh).transpose(0, 2, 1, 3)
    dP = dC @ V.transpose(0, 1, 3, 2)
    dV = P.transpose(0, 1, 3, 2) @ dC
    dS = P * (dP - np.sum(dP * P, axis=-1, keepdims=True)) * scale
    dQ = dS @ K
    dK = dS.transpose(0, 1, 3, 2) @ Q

    def merge(x):
        return x.transpose(0, 2, 1, 3).reshape(B * T, D)

    Af = A.reshape(B * T, Din)
    dA = np.zeros((B * T, Din))
    for name, dX, W in (("q", dQ, Wq), ("k", dK, Wk), ("v", dV, Wv)):
        m = merge(dX)
        grads[f"{prefix}.W{name}"] = Af.T @ m
        grads[f"{prefix}.b{name}"] = m.sum(axis=0)
        dA += m @ W.T
    return dA.reshape(B, T, Din), grads


# -- dropout / dense / softmax ------------------------------------------------


def dropout_mask(shape, p, rng):
    """Inverted-dropout mask: zero with probability ``p``, else ``1/(1-p)``."""
    if p <= 0.0:
        return None
    keep = rng.random(shape) >= p
    return keep / (1.0 - p)


def softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)
