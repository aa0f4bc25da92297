"""Scaled dot-product attention with a record/replace hook.

The controller stores post-softmax probability maps keyed by
(layer_id, step_index). Multiple attention calls can hit the same key
within one sampling step (e.g. guidance branches); records append in call
order and replacement consumes in the same order, so a record pass
followed by a replace pass with unchanged inputs is bit-identical.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, softmax


class AttentionReplaceError(KeyError):
    pass


class AttentionController:
    """mode 'off': plain attention. 'record': snapshot each probability map.
    'replace': substitute the stored map for the computed one; gradients then
    flow through the stored map (into values only)."""

    def __init__(self, mode="off", layers=None):
        if mode not in ("off", "record", "replace"):
            raise ValueError(f"unknown controller mode {mode!r}")
        self.mode = mode
        self.layers = None if layers is None else frozenset(layers)
        self.store = {}
        self._cursor = {}

    def applies_to(self, layer_id):
        return self.mode != "off" and (self.layers is None or layer_id in self.layers)

    def record(self, layer_id, step_index, probs):
        self.store.setdefault((layer_id, step_index), []).append(probs.copy())

    def fetch(self, layer_id, step_index, expected_shape):
        key = (layer_id, step_index)
        entries = self.store.get(key)
        if not entries:
            raise AttentionReplaceError(
                f"no recorded attention for layer {layer_id!r} at step {step_index}")
        slot = self._cursor.get(key, 0)
        if slot >= len(entries):
            raise AttentionReplaceError(
                f"recorded attention for layer {layer_id!r} at step {step_index} exhausted "
                f"({len(entries)} recorded, call {slot + 1} requested)")
        self._cursor[key] = slot + 1
        probs = entries[slot]
        if probs.shape != tuple(expected_shape):
            raise AttentionReplaceError(
                f"attention shape mismatch for layer {layer_id!r} at step {step_index}: "
                f"stored {probs.shape}, expected {tuple(expected_shape)}")
        return probs

    def start_replay(self):
        """Reset the replace-mode read position (call once per replay pass)."""
        self._cursor = {}

    def rewind(self, mode):
        """Switch mode keeping the store; rewinds the replay position."""
        if mode not in ("off", "record", "replace"):
            raise ValueError(f"unknown controller mode {mode!r}")
        self.mode = mode
        self.start_replay()
        return self


def attention(q, k, v, ctrl=None, layer_id=None, step_index=None, key_mask=None):
    """Softmax(q kT / sqrt(d)) v over the last two axes; leading axes batch.

    key_mask, if given, is a boolean array broadcastable to the score shape
    (True = attend); fully masked rows are not allowed.
    """
    d = q.shape[-1]
    if k.shape[-1] != d:
        raise ValueError(f"attention dim mismatch: q has d={d}, k has d={k.shape[-1]}")
    if k.shape[-2] != v.shape[-2]:
        raise ValueError(f"attention key/value length mismatch: {k.shape[-2]} vs {v.shape[-2]}")
    score_shape = q.shape[:-1] + (k.shape[-2],)

    if ctrl is not None and ctrl.applies_to(layer_id) and ctrl.mode == "replace":
        stored = ctrl.fetch(layer_id, step_index, score_shape)
        probs = Tensor(stored.astype(q.dtype, copy=False))
        return probs @ v

    scale = 1.0 / np.sqrt(d)
    scores = (q @ k.transpose(tuple(range(k.ndim - 2)) + (k.ndim - 1, k.ndim - 2))) * scale
    if key_mask is not None:
        mask = np.broadcast_to(np.asarray(key_mask, dtype=bool), scores.shape)
        if not mask.any(axis=-1).all():
            raise ValueError("attention key_mask leaves a fully masked query row")
        scores = scores + np.where(mask, 0.0, -1e9).astype(scores.dtype)
    probs = softmax(scores, axis=-1)
    if ctrl is not None and ctrl.applies_to(layer_id) and ctrl.mode == "record":
        ctrl.record(layer_id, step_index, probs.data)
    return probs @ v
