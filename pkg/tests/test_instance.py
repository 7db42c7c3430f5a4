"""Instance and uncertainty data model: validation, generation, round trips."""

import json

import numpy as np
import pytest

from robusteam import (
    GenerationConfig,
    Instance,
    UncertaintySpec,
    ValidationError,
    generate_instance,
    generate_uncertainty,
    load_instance,
    load_uncertainty,
    save_instance,
    save_uncertainty,
)


def test_minimal_instance():
    inst = Instance(
        travel=[[0, 5], [5, 0]],
        processing=[10],
        requirements=[[[1]]],
        qualifications=[[[1]]],
        e_max=100.0,
    )
    assert inst.n_jobs == 1
    assert inst.n_employees == 1
    assert inst.n_skills == 1
    assert inst.n_levels == 1
    assert inst.team_bound == 1
    assert list(inst.jobs) == [1]
    assert list(inst.nodes) == [0, 1]


def test_arrays_are_frozen():
    inst = generate_instance(2, 2, seed=0)
    with pytest.raises(ValueError):
        inst.travel[0, 1] = 99.0


@pytest.mark.parametrize(
    "patch, message",
    [
        ({"requirements": [[1]]}, "3-d"),
        ({"travel": [[0, 1], [1, 0], [0, 0]]}, "travel"),
        ({"travel": [[0, -1], [1, 0]]}, "nonnegative"),
        ({"travel": [[1, 1], [1, 0]]}, "diagonal"),
        ({"processing": [10, 20]}, "processing"),
        ({"processing": [-1]}, "nonnegative"),
        ({"qualifications": [[[2]]]}, "0 or 1"),
        ({"requirements": [[[-1]]]}, "nonnegative"),
        ({"e_max": -5.0}, "e_max"),
        ({"qualifications": [[[1, 0]]]}, "shape"),
    ],
)
def test_instance_validation_errors(patch, message):
    base = dict(
        travel=[[0, 5], [5, 0]],
        processing=[10],
        requirements=[[[1]]],
        qualifications=[[[1]]],
        e_max=100.0,
    )
    base.update(patch)
    with pytest.raises(ValidationError, match=message):
        Instance(**base)


def test_generate_parameter_echo():
    inst = generate_instance(4, 4, seed=1)
    assert inst.n_jobs == 4
    assert inst.n_employees == 4
    assert inst.team_bound == 4
    assert inst.n_skills == 3
    assert inst.n_levels == 3
    assert inst.e_max == 540.0


def test_generate_team_bound_is_min_rule():
    assert generate_instance(20, 10, seed=7).team_bound == 10
    assert generate_instance(3, 10, seed=7).team_bound == 3


def test_generate_determinism():
    a = generate_instance(5, 4, seed=11)
    b = generate_instance(5, 4, seed=11)
    assert a == b
    c = generate_instance(5, 4, seed=12)
    assert a != c


def test_generate_triangle_inequality():
    for seed in range(5):
        d = generate_instance(6, 3, seed=seed).travel
        n = d.shape[0]
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    assert d[i, j] <= d[i, k] + d[k, j]


def test_generate_requirement_and_processing_ranges():
    cfg = GenerationConfig()
    inst = generate_instance(30, 10, seed=3)
    assert inst.requirements.min() >= 0
    assert inst.requirements.max() <= 2
    assert inst.processing.min() >= cfg.processing_min
    assert inst.processing.max() <= cfg.processing_max
    assert np.isin(inst.qualifications, (0, 1)).all()


def test_generate_uncertainty_level_profile():
    inst = generate_instance(4, 4, seed=2)
    unc = generate_uncertainty(inst, seed=5)
    assert (unc.r_hat[:, :, 0] == 2).all()
    assert (unc.r_hat[:, :, 1] == 1).all()
    assert (unc.r_hat[:, :, 2] == 1).all()
    assert unc.costs[:, :, 0].min() >= 1 and unc.costs[:, :, 0].max() <= 2
    assert unc.costs[:, :, 1].min() >= 3 and unc.costs[:, :, 1].max() <= 4
    assert unc.costs[:, :, 2].min() >= 5 and unc.costs[:, :, 2].max() <= 6
    assert unc.gamma_job == 4
    assert unc.gamma_global == 2 * inst.n_jobs


def test_generate_uncertainty_determinism():
    inst = generate_instance(4, 4, seed=2)
    assert generate_uncertainty(inst, seed=5) == generate_uncertainty(inst, seed=5)
    assert generate_uncertainty(inst, seed=5) != generate_uncertainty(inst, seed=6)


def test_uncertainty_validation():
    with pytest.raises(ValidationError, match="costs"):
        UncertaintySpec(r_hat=[[[1]]], costs=[[[0]]], gamma_job=1, gamma_global=0)
    with pytest.raises(ValidationError, match="gamma_job"):
        UncertaintySpec(r_hat=[[[1]]], costs=[[[1]]], gamma_job=2, gamma_global=0)
    with pytest.raises(ValidationError, match="gamma_global"):
        UncertaintySpec(r_hat=[[[1]]], costs=[[[1]]], gamma_job=1, gamma_global=-1)
    with pytest.raises(ValidationError, match="r_hat"):
        UncertaintySpec(r_hat=[[[-1]]], costs=[[[1]]], gamma_job=1, gamma_global=0)
    with pytest.raises(ValidationError, match="shape"):
        UncertaintySpec(r_hat=[[[1, 1]]], costs=[[[1]]], gamma_job=1, gamma_global=0)


def test_instance_round_trip(tmp_path):
    inst = generate_instance(5, 3, seed=9)
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    again = load_instance(path)
    assert again == inst
    # byte-stable on re-save
    second = tmp_path / "inst2.json"
    save_instance(again, second)
    assert path.read_bytes() == second.read_bytes()


def test_uncertainty_round_trip(tmp_path):
    inst = generate_instance(3, 3, seed=4)
    unc = generate_uncertainty(inst, seed=4)
    path = tmp_path / "unc.json"
    save_uncertainty(unc, path)
    assert load_uncertainty(path) == unc


def test_load_rejects_missing_field(tmp_path):
    inst = generate_instance(2, 2, seed=0)
    data = inst.to_dict()
    del data["travel"]
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ValidationError, match="travel"):
        load_instance(path)


def test_load_rejects_bad_json(tmp_path):
    path = tmp_path / "garbage.json"
    path.write_text("{not json")
    with pytest.raises(ValidationError, match="JSON"):
        load_instance(path)


def test_load_rejects_inconsistent_counts(tmp_path):
    inst = generate_instance(2, 2, seed=0)
    data = inst.to_dict()
    data["n_jobs"] = 7
    path = tmp_path / "counts.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ValidationError, match="n_jobs"):
        load_instance(path)


def test_generate_rejects_empty():
    with pytest.raises(ValueError):
        generate_instance(0, 3, seed=0)
    with pytest.raises(ValueError):
        generate_instance(3, 0, seed=0)
