import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from logprivacy.embedding import (
    EmbeddingModel,
    TrainConfig,
    UnknownActivityError,
    cosine,
    event_distance,
    train_act2vec,
    training_pairs,
)
from logprivacy.eventlog import EventLog


def model_from(vectors: dict) -> EmbeddingModel:
    labels = tuple(vectors)
    mat = np.array([vectors[l] for l in labels], dtype=float)
    return EmbeddingModel(labels, mat, np.zeros_like(mat))


def two_branch_log():
    return EventLog.from_sequences([("X", "B1", "Y")] * 200 + [("X", "B2", "Y")] * 200)


class TestCosine:
    def test_identical(self):
        v = np.array([0.3, -1.2, 4.0])
        assert cosine(v, v) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert cosine([1, 0], [0, 1]) == 0.0

    def test_opposing(self):
        v = np.array([0.3, -1.2, 4.0])
        assert cosine(v, -v) == pytest.approx(-1.0)

    def test_zero_vector(self):
        with pytest.raises(ValueError):
            cosine([0, 0], [1, 0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            cosine([1, 0], [1, 0, 0])

    @given(arrays(float, 5, elements=st.floats(-1e3, 1e3)), arrays(float, 5, elements=st.floats(-1e3, 1e3)))
    def test_range(self, a, b):
        if np.dot(a, a) < 1e-12 or np.dot(b, b) < 1e-12:
            return
        assert -1.0 <= cosine(a, b) <= 1.0


class TestEventDistance:
    def test_fixed_vectors(self):
        m = model_from({"a": [1, 0], "b": [0, 2], "c": [-3, 0], "d": [5, 0]})
        assert event_distance(m, "a", "a") == 0.0
        assert event_distance(m, "a", "d") == 0.0
        assert event_distance(m, "a", "b") == 1.0
        assert event_distance(m, "a", "c") == 2.0

    def test_unknown_activity_named(self):
        m = model_from({"a": [1, 0]})
        with pytest.raises(UnknownActivityError, match="'zz'"):
            event_distance(m, "a", "zz")

    def test_symmetric_and_bounded(self):
        rng = np.random.default_rng(5)
        m = model_from({f"a{i}": rng.normal(size=6) for i in range(12)})
        for a, b in itertools.product(m.labels, repeat=2):
            d = event_distance(m, a, b)
            assert d == event_distance(m, b, a)
            assert 0.0 <= d <= 2.0
            if a == b:
                assert d == 0.0


class TestTraining:
    def test_pairs_single_trace(self):
        assert sorted(map(tuple, training_pairs([[0, 1]], 2).tolist())) == [(0, 1), (1, 0)]

    def test_pairs_window(self):
        pairs = {tuple(p) for p in training_pairs([[0, 1, 2, 3]], 1).tolist()}
        assert pairs == {(0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2)}

    def test_deterministic(self):
        log = EventLog.from_sequences([("A", "B", "C"), ("A", "C", "B", "D")] * 10)
        cfg = TrainConfig(seed=11, epochs=5)
        m1, m2 = train_act2vec(log, cfg), train_act2vec(log, cfg)
        assert np.array_equal(m1.input_vectors, m2.input_vectors)
        assert np.array_equal(m1.context_vectors, m2.context_vectors)
        m3 = train_act2vec(log, TrainConfig(seed=12, epochs=5))
        assert not np.array_equal(m1.input_vectors, m3.input_vectors)

    def test_every_activity_has_a_nonzero_row(self):
        log = EventLog.from_sequences([("A", "B"), ("C",)])
        m = train_act2vec(log, TrainConfig(epochs=3))
        assert m.labels == ("A", "B", "C")
        assert np.all(np.linalg.norm(m.input_vectors, axis=1) > 0)

    def test_single_activity_warns(self):
        with pytest.warns(UserWarning, match="single activity"):
            m = train_act2vec(EventLog.from_sequences([("A", "A")]), TrainConfig(epochs=2))
        assert np.linalg.norm(m.input_vectors[0]) > 0

    def test_context_similarity(self):
        m = train_act2vec(two_branch_log(), TrainConfig(seed=3))
        close = event_distance(m, "B1", "B2")
        for other in ("X", "Y"):
            assert close < event_distance(m, "B1", other) - 0.1

    def test_average_vectors_switch(self):
        log = two_branch_log()
        m = train_act2vec(log, TrainConfig(seed=3, epochs=5, vectors="average"))
        assert np.allclose(m.actvec, (m.input_vectors + m.context_vectors) / 2)

    @pytest.mark.parametrize("bad", [dict(dimension=0), dict(window=0), dict(epochs=0),
                                     dict(negative_samples=0), dict(dimension=2048),
                                     dict(learning_rate=0.0), dict(vectors="both")])
    def test_config_validation(self, bad):
        with pytest.raises(ValueError):
            TrainConfig(**bad)


class TestPersistence:
    def test_json_round_trip(self, tmp_path):
        m = train_act2vec(two_branch_log(), TrainConfig(epochs=2))
        m.save(tmp_path / "m.json")
        back = EmbeddingModel.load(tmp_path / "m.json")
        assert back.labels == m.labels
        assert np.array_equal(back.input_vectors, m.input_vectors)
        assert np.array_equal(back.context_vectors, m.context_vectors)
        assert np.array_equal(back.distance_matrix(), m.distance_matrix())

    def test_rejects_foreign_file(self):
        with pytest.raises(ValueError):
            EmbeddingModel.from_json('{"format": "other"}')

    def test_csv_export(self):
        m = model_from({"a": [1.5, 0.0], "b,c": [0.0, -2.0]})
        lines = m.to_csv().splitlines()
        assert lines == ["label,v_1,v_2", "a,1.5,0.0", '"b,c",0.0,-2.0']
