import json

import pytest

from gmtkit import _parallel, calibration as cal, verify


def test_unknown_suite():
    with pytest.raises(KeyError):
        verify.run("nonexistent")


def test_report_has_no_timings():
    text = verify.report_json(verify.run("energy-oracles", 3))
    assert "seconds" not in text and json.loads(text)


@pytest.mark.parametrize("suite", ["fourier-identity", "cone-inequality", "scaling"])
def test_other_seeds_pass(suite):
    for seed in (1, 7):
        assert all(r.passed for r in verify.run(suite, seed))


def test_threads_do_not_change_reports():
    reports = []
    for t in (1, 4):
        _parallel.set_threads(t)
        reports.append(verify.report_json(verify.run("cone-inequality", 5)))
    assert reports[0] == reports[1]


def test_calibration_reruns_exactly():
    mel = max(v[3] for v in verify.melnikov_values())
    assert mel <= cal.MELNIKOV_K and mel == pytest.approx(cal.MELNIKOV_K, rel=1e-11)
    cor = verify.corona_values()
    for k, ref in cal.PACKING_RATIO.items():
        assert cor[k]["packing"] == pytest.approx(ref, rel=1e-11)
    assert verify.reverse_fixture().measured_c == pytest.approx(cal.REVERSE_C, rel=1e-11)
    assert verify.key_cone_fixture() == cal.KEY_CONE_C
