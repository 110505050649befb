import csv
import io
import json

import numpy as np
import pytest

from frackap import fixture_path, harness
from frackap.errors import DomainError
from frackap.harness import (ANCHORS, DEFAULT_IDENTITIES, CheckReport, check_integrable_lp41,
                             estimate_inequality_constant, reports_to_csv, reports_to_text,
                             run_identity_suite, run_verification)

QUICK = {"kernel_mass": [{"gamma": 1.0, "a": [1.0], "t": 1.0}],
         "eigenfunction": [{"a": [1.0]}],
         "scaling": [{"gamma": 1.5, "a": [1.0], "pairs": 5}]}


def test_empty_config():
    assert run_identity_suite({}) == []
    assert run_verification({}) == []


def test_unknown_check():
    with pytest.raises(DomainError):
        run_identity_suite({"nonsense": [{}]})
    with pytest.raises(DomainError):
        estimate_inequality_constant("nonsense")


def test_quick_suite_passes():
    reps = run_identity_suite(QUICK)
    assert [r.check_id for r in reps] == sorted(r.check_id for r in reps)
    assert all(r.passed for r in reps), [(r.check_id, r.value) for r in reps]


@pytest.mark.parametrize("cid", sorted(DEFAULT_IDENTITIES))
def test_each_default_identity_first_tuple(cid):
    if cid == "kernel_mass":
        params = [{"gamma": 0.5, "a": [2.0], "t": 0.25}]
    else:
        params = DEFAULT_IDENTITIES[cid][:1]
    reps = run_identity_suite({cid: params})
    assert len(reps) == 1 and reps[0].passed, reps[0]


def test_fault_injection():
    with open(fixture_path("verify_fault.json")) as fh:
        cfg = json.load(fh)
    reps = run_verification(cfg)
    assert len(reps) == 1 and reps[0].status == "fail"
    assert reps[0].value == pytest.approx(0.01, rel=0.05)
    assert reps[0].witness


def test_contraction():
    rep = estimate_inequality_constant("contraction", {"t": [0.5, 2.0]})
    assert rep.value <= 1 + 1e-8
    assert rep.passed


def test_gamma1_finite():
    rep = estimate_inequality_constant("gamma1", {"p": [2.0]})
    assert rep.passed and np.isfinite(rep.value) and rep.value > 0


def test_gammadelta_near_two():
    low = estimate_inequality_constant("gammadelta", {"gamma": [1.5], "members": 6})
    high = estimate_inequality_constant("gammadelta", {"gamma": [1.9], "members": 6})
    assert np.isfinite(high.value) and high.passed
    assert high.value > 0 and low.value > 0


def test_lp41():
    rep = check_integrable_lp41(-0.5)
    assert rep.passed and rep.params["R0"] >= 1.0 and rep.value < 1e-3
    assert check_integrable_lp41(0.0, {"tol": 0.0}).status == "inconclusive"
    with pytest.raises(DomainError):
        check_integrable_lp41(-0.7)


def test_report_status_validated():
    with pytest.raises(DomainError):
        CheckReport("scaling", "maybe", 0.0, 1.0)


def test_serialisation_deterministic():
    a = reports_to_csv(run_identity_suite(dict(QUICK, seed=3)))
    b = reports_to_csv(run_identity_suite(dict(QUICK, seed=3)))
    assert a == b
    rows = list(csv.reader(io.StringIO(a)))
    assert rows[0] == ["check_id", "params", "status", "value [1]", "tolerance [1]",
                       "refined [1]", "witness"]
    assert len(rows) == 4
    json.loads(rows[1][1])


def test_threads_do_not_change_order():
    one = reports_to_csv(run_identity_suite(QUICK, threads=1))
    many = reports_to_csv(run_identity_suite(QUICK, threads=3))
    assert one == many


def test_text_report():
    reps = run_identity_suite(QUICK)
    text = reports_to_text(reps)
    assert "anchors:" in text
    for r in reps:
        assert ANCHORS[r.check_id] in text
    assert "consistent with" in text
    assert "verifies" not in text


def test_every_check_has_anchor():
    ids = set(harness.IDENTITY_CHECKS) | set(harness.INEQUALITY_CHECKS) | {"lp41"}
    assert ids == set(ANCHORS)
