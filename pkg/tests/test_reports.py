import json

import pytest

from sigma_race.congruence import RaceModulus, beta_report
from sigma_race.race import (
    Direction,
    EnvelopeReport,
    PointwiseScanReport,
    TheoremCertificate,
    WeightedBoundReport,
    check_envelopes,
    check_weighted_bounds,
    pointwise_scan,
    run_race,
    run_races,
)
from sigma_race.congruence import BetaReport
from sigma_race.reports import dumps_csv, dumps_json, loads_json, write_report


def test_certificate_json_schema():
    cert = run_race(1, 999)
    data = json.loads(dumps_json(cert))
    assert list(data) == ["q", "k", "k_max", "verified", "min_margin", "argmin_k", "elapsed_ms"]
    assert data["q"] == 30 and data["k"] == 1 and data["k_max"] == 999 and data["verified"] is True
    assert isinstance(data["min_margin"], str) and int(data["min_margin"]) == cert.min_margin


def test_big_margin_stays_exact():
    cert = TheoremCertificate(RaceModulus(30, 1), 10, True, 2**100 + 1, 3, 0)
    assert loads_json(dumps_json(cert), TheoremCertificate) == cert
    assert f"{2**100 + 1}" in dumps_csv(cert)


def test_envelope_csv_schema():
    rep = check_envelopes(RaceModulus(30, 0), [1000, 5000])
    text = dumps_csv(rep)
    lines = text.split("\n")
    assert lines[0] == "x,normalized_sum,beta_term,residual,envelope_lo,envelope_hi,pass"
    assert lines[1].startswith("1000,") and lines[1].endswith(",true")
    assert "\r" not in text and text.endswith("\n")


def test_beta_json_schema():
    data = json.loads(dumps_json(beta_report(RaceModulus(30, 0), 1000)))
    assert data["coefficient_num"] == 319 and data["coefficient_den"] == 1080
    for key in ("numeric", "series_partial", "tail_bound"):
        assert isinstance(data[key], float)


def test_float_precision_is_12_digits():
    rep = check_envelopes(RaceModulus(30, 0), [1000])
    row = dumps_csv(rep).split("\n")[1].split(",")
    assert row[1] == f"{rep.samples[0].normalized_sum:.12g}"


def _reports():
    return [
        (run_race(7, 500), TheoremCertificate),
        (run_races([1, 29], 300), TheoremCertificate),
        (check_envelopes(RaceModulus(30, 11), [1000, 3000]), EnvelopeReport),
        (check_weighted_bounds([1000, 2000], [1, 13]), WeightedBoundReport),
        (beta_report(RaceModulus(30, 0), 5000), BetaReport),
        (pointwise_scan("phi", 1, Direction.BASE_GREATER, 500, max_recorded=10), PointwiseScanReport),
    ]


@pytest.mark.parametrize("report, kind", _reports(), ids=lambda v: getattr(v, "__name__", ""))
def test_json_round_trip(report, kind):
    text = dumps_json(report)
    back = loads_json(text, kind)
    assert dumps_json(back) == text
    if kind in (TheoremCertificate, PointwiseScanReport):
        assert back == report


def test_deterministic_output_except_elapsed():
    a = json.loads(dumps_json(run_races([1, 7], 3000)))
    b = json.loads(dumps_json(run_races([1, 7], 3000)))
    for d in a + b:
        d.pop("elapsed_ms")
    assert a == b
    assert dumps_csv(check_weighted_bounds([1000])) == dumps_csv(check_weighted_bounds([1000]))


def test_write_report_to_file(tmp_path):
    out = tmp_path / "r.csv"
    text = write_report(run_race(1, 10), "csv", str(out))
    assert out.read_bytes() == text.encode("utf-8")
    assert text.splitlines()[0] == "q,k,k_max,verified,min_margin,argmin_k,elapsed_ms"


def test_unknown_format():
    with pytest.raises(ValueError):
        write_report(run_race(1, 10), "xml")
