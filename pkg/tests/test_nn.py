import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scenekit.nn import (
    AttentionController,
    AttentionReplaceError,
    Conv2d,
    LayerNorm,
    Linear,
    Module,
    Parameter,
    Tensor,
    attention,
    avg_pool2,
    concat,
    conv2d,
    grad_check,
    sinusoidal_encode,
    softmax,
    upsample2,
)


def rng(seed=0):
    return np.random.Generator(np.random.PCG64(seed))


# ---------------------------------------------------------------- grad_check

def test_grad_check_sum_of_squares():
    # f(x) = sum x^2, grad = 2x; closed form (2, 4) at x = (1, 2)
    x = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    y = (x * x).sum()
    y.backward()
    assert np.allclose(x.grad, [2.0, 4.0])
    err = grad_check(lambda t: (t * t).sum(), x, eps=1e-4)
    assert err < 1e-6


@pytest.mark.parametrize("op", [
    lambda x: (x + 2.0).sum(),
    lambda x: (x * 3.0 - 1.0).mean(),
    lambda x: (x / (x * x + 2.0)).sum(),
    lambda x: (x ** 3).sum(),
    lambda x: x.exp().sum(),
    lambda x: (x * x + 1.0).log().sum(),
    lambda x: (x * x + 0.5).sqrt().sum(),
    lambda x: x.sigmoid().sum(),
    lambda x: x.silu().sum(),
    lambda x: x.reshape(6).sum(),
    lambda x: x.transpose((1, 0)).silu().sum(),
    lambda x: x[0:1, :].sum() + 2.0 * x[1, 1],
    lambda x: softmax(x, axis=-1).silu().sum(),
    lambda x: (x.mean(axis=0) * x.sum(axis=1, keepdims=True)).sum(),
])
def test_grad_check_primitives(op):
    x = Tensor(rng(3).standard_normal((2, 3)), requires_grad=True)
    assert grad_check(op, x, eps=1e-4) < 1e-4


def test_grad_check_matmul_broadcast():
    a = rng(5).standard_normal((4, 5))

    def f(x):
        return (x @ Tensor(a)).silu().sum()

    x = Tensor(rng(6).standard_normal((2, 3, 4)))
    assert grad_check(f, x, eps=1e-4) < 1e-4

    def g(w):
        return (Tensor(x.data) @ w).silu().sum()

    assert grad_check(g, Tensor(a), eps=1e-4) < 1e-4


def test_grad_check_conv_plus_nonlinearity():
    # random 3x3 convolution + nonlinearity on an 8x8 input
    w = Tensor(rng(7).standard_normal((3, 3, 2, 3)) * 0.3)
    b = Tensor(rng(8).standard_normal(3) * 0.1)

    def f(x):
        return conv2d(x, w, b).silu().sum()

    x = Tensor(rng(9).standard_normal((1, 8, 8, 2)))
    assert grad_check(f, x, eps=1e-4) < 1e-4


def test_grad_check_conv_weights():
    x = Tensor(rng(10).standard_normal((2, 5, 5, 3)))

    def f(w):
        return conv2d(x, w).silu().sum()

    w0 = Tensor(rng(11).standard_normal((3, 3, 3, 2)) * 0.3)
    assert grad_check(f, w0, eps=1e-4) < 1e-4


def test_grad_check_attention():
    # attention layer with random q, k, v (S=6, d=4)
    k = Tensor(rng(12).standard_normal((6, 4)))
    v = Tensor(rng(13).standard_normal((6, 4)))

    def f(q):
        return attention(q, k, v).silu().sum()

    q0 = Tensor(rng(14).standard_normal((6, 4)))
    assert grad_check(f, q0, eps=1e-4) < 1e-4

    def g(kx):
        return attention(Tensor(q0.data), kx, v).silu().sum()

    assert grad_check(g, k, eps=1e-4) < 1e-4

    def h(vx):
        return attention(Tensor(q0.data), k, vx).silu().sum()

    assert grad_check(h, v, eps=1e-4) < 1e-4


def test_grad_check_pool_upsample_concat_layernorm():
    def f(x):
        a = avg_pool2(x)
        b = upsample2(a)
        c = concat([x, b], axis=-1)
        gain = Tensor(np.ones(c.shape[-1]))
        bias = Tensor(np.zeros(c.shape[-1]))
        from scenekit.nn.tensor import layer_norm
        return layer_norm(c, gain, bias).silu().sum()

    x = Tensor(rng(15).standard_normal((1, 4, 4, 2)))
    assert grad_check(f, x, eps=1e-4) < 1e-4


def test_grad_check_rejects_bad_eps():
    with pytest.raises(ValueError):
        grad_check(lambda t: (t * t).sum(), Tensor(np.ones(2)), eps=0.0)


def test_grad_check_reports_nonfinite():
    with pytest.raises(FloatingPointError):
        grad_check(lambda t: (t.log()).sum(), Tensor(np.array([-1.0])), eps=1e-4)


# ---------------------------------------------------------------- conv oracle

def brute_conv2d(x, w, b):
    bsz, h, wd, cin = x.shape
    kh, kw, _, cout = w.shape
    ph, pw = kh // 2, kw // 2
    xp = np.pad(x, ((0, 0), (ph, ph), (pw, pw), (0, 0)))
    out = np.zeros((bsz, h, wd, cout))
    for n in range(bsz):
        for i in range(h):
            for j in range(wd):
                patch = xp[n, i:i + kh, j:j + kw, :]
                out[n, i, j] = np.einsum("ijc,ijco->o", patch, w) + b
    return out


def test_conv2d_matches_bruteforce():
    g = rng(21)
    x = g.standard_normal((2, 6, 5, 3)).astype(np.float32)
    w = g.standard_normal((3, 3, 3, 4)).astype(np.float32)
    b = g.standard_normal(4).astype(np.float32)
    got = conv2d(Tensor(x), Tensor(w), Tensor(b)).data
    want = brute_conv2d(x, w, b)
    assert np.allclose(got, want, atol=1e-4)


# ---------------------------------------------------------------- attention

def test_attention_singleton_returns_value():
    q = Tensor(rng(30).standard_normal((1, 4)))
    k = Tensor(rng(31).standard_normal((1, 4)))
    v = Tensor(rng(32).standard_normal((1, 3)))
    out = attention(q, k, v)
    assert np.allclose(out.data, v.data)


def test_attention_equal_logits_average_values():
    q = Tensor(np.zeros((1, 4)))
    k = Tensor(np.zeros((2, 4)))
    v = Tensor(np.array([[1.0, 3.0], [5.0, 7.0]]))
    out = attention(q, k, v)
    assert np.allclose(out.data, [[3.0, 5.0]], atol=1e-6)


def test_attention_rows_sum_to_one():
    q = Tensor(rng(33).standard_normal((3, 7, 4)))
    k = Tensor(rng(34).standard_normal((3, 5, 4)))
    probs = softmax((q @ k.transpose((0, 2, 1))) * (1 / 2.0), axis=-1)
    assert np.allclose(probs.data.sum(axis=-1), 1.0, atol=1e-6)


def test_attention_record_replace_roundtrip_bitexact():
    g = rng(35)
    q = Tensor(g.standard_normal((2, 6, 4)).astype(np.float32))
    k = Tensor(g.standard_normal((2, 6, 4)).astype(np.float32))
    v = Tensor(g.standard_normal((2, 6, 5)).astype(np.float32))
    ctrl = AttentionController("record")
    first = attention(q, k, v, ctrl, layer_id="L", step_index=3)
    ctrl.rewind("replace")
    second = attention(q, k, v, ctrl, layer_id="L", step_index=3)
    assert np.array_equal(first.data, second.data)


def test_attention_replace_missing_key_names_layer_and_step():
    ctrl = AttentionController("replace")
    q = Tensor(np.zeros((2, 4)))
    with pytest.raises(AttentionReplaceError, match=r"'L7'.*step 9"):
        attention(q, q, q, ctrl, layer_id="L7", step_index=9)


def test_attention_replace_dim_mismatch_rejected():
    g = rng(36)
    q = Tensor(g.standard_normal((2, 4)))
    ctrl = AttentionController("record")
    attention(q, q, q, ctrl, layer_id="L", step_index=0)
    ctrl.rewind("replace")
    big = Tensor(g.standard_normal((3, 4)))
    with pytest.raises(AttentionReplaceError, match="shape mismatch"):
        attention(big, big, big, ctrl, layer_id="L", step_index=0)


def test_attention_replace_gradient_flows_through_stored_probs():
    g = rng(37)
    q = Tensor(g.standard_normal((3, 4)), requires_grad=True)
    k = Tensor(g.standard_normal((3, 4)), requires_grad=True)
    v = Tensor(g.standard_normal((3, 2)), requires_grad=True)
    ctrl = AttentionController("record")
    attention(q, k, v, ctrl, layer_id="L", step_index=0)
    probs = ctrl.store[("L", 0)][0]
    ctrl.rewind("replace")
    out = attention(q, k, v, ctrl, layer_id="L", step_index=0)
    out.sum().backward()
    assert q.grad is None and k.grad is None  # stored map is a constant
    assert np.allclose(v.grad, probs.T @ np.ones((3, 2)), atol=1e-6)


def test_attention_controller_layer_filter():
    q = Tensor(rng(38).standard_normal((2, 4)))
    ctrl = AttentionController("record", layers={"keep"})
    attention(q, q, q, ctrl, layer_id="keep", step_index=0)
    attention(q, q, q, ctrl, layer_id="skip", step_index=0)
    assert ("keep", 0) in ctrl.store and ("skip", 0) not in ctrl.store


def test_attention_repeated_calls_same_key_consume_in_order():
    g = rng(39)
    qs = [Tensor(g.standard_normal((2, 4)).astype(np.float32)) for _ in range(2)]
    ctrl = AttentionController("record")
    outs = [attention(q, q, q, ctrl, layer_id="L", step_index=0) for q in qs]
    ctrl.rewind("replace")
    replayed = [attention(q, q, q, ctrl, layer_id="L", step_index=0) for q in qs]
    for a, b in zip(outs, replayed):
        assert np.array_equal(a.data, b.data)
    with pytest.raises(AttentionReplaceError, match="exhausted"):
        attention(qs[0], qs[0], qs[0], ctrl, layer_id="L", step_index=0)


def test_attention_key_mask():
    q = Tensor(np.zeros((1, 4)))
    k = Tensor(np.zeros((3, 4)))
    v = Tensor(np.array([[1.0], [100.0], [3.0]]))
    out = attention(q, k, v, key_mask=np.array([True, False, True]))
    assert np.allclose(out.data, [[2.0]], atol=1e-4)
    with pytest.raises(ValueError, match="fully masked"):
        attention(q, k, v, key_mask=np.array([False, False, False]))


# ---------------------------------------------------------------- encoding

def test_sinusoidal_encode_zero():
    assert np.allclose(sinusoidal_encode([0.0], 2), [0.0, 1.0, 0.0, 1.0])


def test_sinusoidal_encode_pi():
    enc = sinusoidal_encode([np.pi], 1)
    assert np.allclose(enc, [0.0, -1.0], atol=1e-6)


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=4),
       st.lists(st.floats(-10, 10), min_size=1, max_size=4),
       st.integers(1, 5))
@settings(max_examples=50, deadline=None)
def test_sinusoidal_encode_concat_ordering(a, b, nf):
    joint = sinusoidal_encode(a + b, nf)
    split = np.concatenate([sinusoidal_encode(a, nf), sinusoidal_encode(b, nf)])
    assert np.allclose(joint, split)


def test_sinusoidal_encode_rejects_zero_freqs():
    with pytest.raises(ValueError):
        sinusoidal_encode([1.0], 0)


# ---------------------------------------------------------------- modules

def test_parameter_init_is_name_keyed_not_order_keyed():
    class Net(Module):
        def __init__(self, swap):
            if swap:
                self.b = Linear(3, 4)
                self.a = Linear(4, 3)
            else:
                self.a = Linear(4, 3)
                self.b = Linear(3, 4)

    n1 = Net(False).initialize(seed=11)
    n2 = Net(True).initialize(seed=11)
    s1, s2 = n1.state_dict(), n2.state_dict()
    assert set(s1) == {"a.w", "a.b", "b.w", "b.b"}
    for k in s1:
        assert np.array_equal(s1[k], s2[k])


def test_duplicate_parameter_names_rejected():
    class Dup(Module):
        def __init__(self):
            self.layers = [Linear(2, 2)]
            setattr(self, "layers.0.w", Parameter((2, 2), fan_in=2, fan_out=2))

    with pytest.raises(ValueError, match="duplicate"):
        Dup().initialize(0)


def test_load_state_dict_validates_shapes_and_names():
    lin = Linear(3, 2).initialize(0)
    state = lin.state_dict()
    state["w"] = np.zeros((2, 2), dtype=np.float32)
    with pytest.raises(ValueError, match="shape mismatch for w"):
        lin.load_state_dict(state)
    with pytest.raises(KeyError, match="missing"):
        lin.load_state_dict({"w": np.zeros((3, 2))})


def test_forward_determinism():
    net = Conv2d(3, 4).initialize(5)
    x = Tensor(rng(40).standard_normal((1, 8, 8, 3)).astype(np.float32))
    a = net(x).data
    b = net(x).data
    assert np.array_equal(a, b)


def test_layernorm_normalizes_last_axis():
    ln = LayerNorm(6).initialize(0)
    x = Tensor(rng(41).standard_normal((4, 6)).astype(np.float32) * 3 + 1)
    y = ln(x).data
    assert np.allclose(y.mean(axis=-1), 0.0, atol=1e-5)
    assert np.allclose(y.std(axis=-1), 1.0, atol=1e-2)
