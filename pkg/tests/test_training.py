import numpy as np
import pytest

from conftest import random_batch, random_model
from pnamsr.kinematics import LoadingMode
from pnamsr.training import (
    AdamState,
    ExpLog,
    MooneyRivlin,
    NeoHookean,
    StressSample,
    TrainConfig,
    TrainingError,
    adam_step,
    generate_synthetic,
    init_model,
    loss,
    loss_gradients,
    predict_stress,
    r2_by_mode,
    r2_score,
    split_dataset,
    train,
)

UE, EBE, PS = LoadingMode.UE, LoadingMode.EBE, LoadingMode.PS


def mr_data(n_per_mode=20):
    lam = np.linspace(1.0, 3.0, n_per_mode)
    return generate_synthetic(MooneyRivlin(0.2, 0.05), [UE, EBE, PS], lam)


def test_stress_sample_validation():
    with pytest.raises(ValueError):
        StressSample(UE, 0.0, 0.0)
    assert StressSample("PS", 2.0, 1.1, 0.4).mode is PS


def test_split_rules():
    data = [StressSample(UE, 1.0 + 0.1 * i, 0.0) for i in range(20)]
    tr, va = split_dataset(data, 0.9)
    assert len(tr) == 18 and len(va) == 2
    assert max(s.lam for s in tr) < min(s.lam for s in va)
    data = [StressSample(UE, float(l), 0.0) for l in range(1, 11)]
    tr, _ = split_dataset(data, 0.5)
    assert sorted(s.lam for s in tr) == [1, 2, 3, 4, 5]
    mixed = data + [StressSample(EBE, float(l), 0.0) for l in range(1, 5)]
    tr, va = split_dataset(mixed, 0.5)
    assert sum(s.mode is EBE for s in tr) == 2 and sum(s.mode is EBE for s in va) == 2
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            split_dataset(data, bad)


def test_loss_zero_for_exact_model():
    data = mr_data(8)
    assert loss(MooneyRivlinModel(), data) < 1e-20


class MooneyRivlinModel:
    """Stands in for a trained model: exact MR gradients."""

    stress_scale = 1.0
    energy_ = MooneyRivlin(0.2, 0.05)

    def grads(self, i1, i2):
        return self.energy_.grads(i1, i2)


def test_zero_gradient_model_on_reference_sample(rng):
    m = random_model(rng)
    m = m.with_vector(np.zeros_like(m.to_vector()))
    assert loss(m, [StressSample(UE, 1.0, 0.0), StressSample(PS, 1.0, 0.0, 0.0)]) == 0.0


def test_loss_gradients_match_finite_differences(rng):
    worst = 0.0
    for i in range(30):
        m = random_model(rng, h=6, kind="pnam" if i % 3 else "mlp")
        batch = random_batch(rng)
        g = loss_gradients(m, batch)
        vec = m.to_vector()
        fd = np.empty_like(vec)
        h = 1e-6
        for j in range(vec.size):
            up, dn = vec.copy(), vec.copy()
            up[j] += h
            dn[j] -= h
            fd[j] = (loss(m.with_vector(up), batch) - loss(m.with_vector(dn), batch)) / (2 * h)
        worst = max(worst, np.max(np.abs(g - fd)) / max(np.max(np.abs(fd)), 1e-12))
    assert worst < 1e-5


def test_loss_gradients_zero_residual_and_additive(rng):
    m = random_model(rng)
    batch = random_batch(rng, 2)
    exact = []
    for s in batch:
        p1, p3 = predict_stress(m, s.mode, s.lam)
        exact.append(StressSample(s.mode, s.lam, float(p1), None if p3 is None else float(p3)))
    assert np.max(np.abs(loss_gradients(m, exact))) < 1e-12
    g = loss_gradients(m, batch)
    np.testing.assert_allclose(g, loss_gradients(m, batch[:1]) + loss_gradients(m, batch[1:]), rtol=1e-12, atol=1e-14)


def test_adam_first_step_and_zero_gradient():
    p = np.array([1.0, -2.0, 3.0])
    g = np.array([0.5, -4.0, 1e-3])
    new = adam_step(AdamState.zeros_like(p), p, g, 1e-3)
    np.testing.assert_allclose(new - p, -1e-3 * np.sign(g), rtol=1e-4)
    same = adam_step(AdamState.zeros_like(p), p, np.zeros(3), 1e-3)
    np.testing.assert_array_equal(same, p)
    with pytest.raises(ValueError):
        adam_step(AdamState.zeros_like(p), p, np.zeros(2), 1e-3)


def test_train_zero_epochs_returns_initial():
    data = mr_data(6)
    cfg = TrainConfig(epochs=0)
    m = init_model(data, cfg)
    out, hist = train(m, data, cfg)
    np.testing.assert_array_equal(out.to_vector(), m.to_vector())
    assert hist.train == [] and hist.validation == []


def test_train_deterministic_and_loss_drops():
    data = mr_data(10)
    cfg = TrainConfig(epochs=1500, seed=3)
    a, ha = train(init_model(data, cfg), data, cfg)
    b, hb = train(init_model(data, cfg), data, cfg)
    assert ha.train == hb.train and ha.validation == hb.validation
    np.testing.assert_array_equal(a.to_vector(), b.to_vector())
    assert ha.train[-1] * 100 <= ha.train[0]


def test_train_divergence_names_epoch():
    data = mr_data(6)
    cfg = TrainConfig(epochs=50, learning_rate=1e300)
    with pytest.raises(TrainingError, match="epoch 1"), np.errstate(all="ignore"):
        train(init_model(data, cfg, "mlp"), data, cfg)


def test_mooney_rivlin_fit_r2():
    data = mr_data(20)
    cfg = TrainConfig(epochs=20000, seed=0)
    model, _ = train(init_model(data, cfg), data, cfg)
    train_set, _ = split_dataset(data, cfg.split_fraction)
    r2 = r2_by_mode(model, train_set)
    assert set(r2) == {UE, EBE, PS}
    assert min(r2.values()) >= 0.999


def test_r2_score():
    y = np.array([1.0, 2.0, 4.0])
    assert r2_score(y, y) == 1.0
    assert r2_score(np.full(3, y.mean()), y) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        r2_score([1.0, 1.0], [2.0, 2.0])


def test_synthetic_generators():
    (s,) = generate_synthetic(NeoHookean(0.5), [UE], [2.0])
    assert s.p1 == pytest.approx(0.875)
    for mode in LoadingMode:
        (s,) = generate_synthetic(ExpLog(), [mode], [1.0])
        assert s.p1 == 0.0 and (s.p3 is None or s.p3 == 0.0)
    # Exp-Log I1-derivative written out by hand
    A, a, b = 0.195, 0.018, 0.33
    i1 = 2.0 ** 2 + 2 / 2.0
    d1 = A * (np.exp(a * (i1 - 3)) - b * np.log(i1 - 2) - b / (i1 - 2))
    h = 1e-6
    fd = (ExpLog().energy(i1 + h, 0) - ExpLog().energy(i1 - h, 0)) / (2 * h)
    assert d1 == pytest.approx(fd, rel=1e-8)
    (s,) = generate_synthetic(ExpLog(A, a, b), [UE], [2.0])
    assert s.p1 == pytest.approx(2 * d1 * (2.0 - 2.0 ** -2), rel=1e-12)


def test_synthetic_noise_seeded():
    a = generate_synthetic(NeoHookean(0.5), [UE, PS], [1.5, 2.0], noise_sd=0.01, seed=4)
    b = generate_synthetic(NeoHookean(0.5), [UE, PS], [1.5, 2.0], noise_sd=0.01, seed=4)
    assert a == b
