"""Phase reports: classification, consistency invariants, document output,
and certificate round trips."""

from __future__ import annotations

import math
from dataclasses import replace

import pytest

from mandelperc.bounds import Bracket, lsr_bracket, lyapunov_bracket
from mandelperc.config import config_from_table
from mandelperc.errors import CertificateError, ConsistencyError
from mandelperc.examples import example_family
from mandelperc.interior import interior_threshold, VectorFamily
from mandelperc.report import (
    bracket_certificate_document,
    build_report,
    classify,
    interior_certificate_document,
    report_document,
    typicality_certificate_document,
    verify_certificate_document,
)
from mandelperc.serialize import Document

GASKET = {"name": "gasket", "dimension": 1, "base": 2, "translations": [0, 1, 2]}
LINE4 = {"name": "line4", "dimension": 1, "base": 2, "translations": [0, 1, 2, 4]}


def gasket_config(p, bracket_length=14):
    return config_from_table(
        dict(
            GASKET,
            p=p,
            budgets={"bracket_length": bracket_length, "mc_steps": 20000},
        )
    )


@pytest.fixture(scope="module")
def gasket_report():
    return build_report(gasket_config(0.7))


@pytest.fixture(scope="module")
def line4_report():
    config = config_from_table(
        dict(
            LINE4,
            p=0.65,
            uset=[[1, 0, 1, 0], [0, 1, 0, 1]],
            budgets={"mc_steps": 20000},
        )
    )
    return build_report(config)


class TestClassify:
    LEB = Bracket(lo=0.4, hi=0.5, lo_witness="", hi_witness="")
    INT = Bracket(lo=0.8, hi=0.9, lo_witness="", hi_witness="")

    def run(self, p, p_hat=0.95):
        return classify(p, 0.25, self.LEB, self.INT, p_hat, M=4, L=2)

    def test_subcritical_up_to_threshold(self):
        assert self.run(0.2)[0] == "subcritical"
        assert self.run(0.25)[0] == "subcritical"

    def test_zero_measure_with_dimension(self):
        label, dim = self.run(0.3)
        assert label == "zero-measure fractal"
        assert dim == pytest.approx(math.log(4 * 0.3) / math.log(2))

    def test_bracket_interior_is_unresolved(self):
        assert self.run(0.45)[0] == "positive-measure empty-interior (unresolved)"
        assert self.run(0.4)[0] == "positive-measure empty-interior (unresolved)"

    def test_certified_band(self):
        assert self.run(0.6)[0] == "positive-measure empty-interior (certified)"

    def test_above_lsr_bracket_is_unresolved(self):
        assert self.run(0.85)[0] == "positive-measure empty-interior (unresolved)"

    def test_interior_possible_is_strict(self):
        assert self.run(0.96)[0] == "interior-possible"
        assert self.run(0.95)[0] != "interior-possible"

    def test_no_p_hat(self):
        label, _ = self.run(0.99, p_hat=None)
        assert label == "positive-measure empty-interior (unresolved)"


class TestBuildReport:
    def test_certified_band_classification(self, gasket_report):
        assert gasket_report.classification == (
            "positive-measure empty-interior (certified)"
        )
        assert gasket_report.dimension is None
        assert gasket_report.p_extinct == pytest.approx(1 / 3)
        assert gasket_report.lsr.exact and gasket_report.lsr.lo == 1.0

    def test_bracket_uncertainty_degrades_to_unresolved(self):
        # the shorter bracket's lower side exceeds exp(-lambda_lo) > 0.7
        report = build_report(gasket_config(0.7, bracket_length=12))
        assert report.classification == (
            "positive-measure empty-interior (unresolved)"
        )

    def test_zero_measure_classification(self):
        report = build_report(gasket_config(0.5))
        assert report.classification == "zero-measure fractal"
        assert report.dimension == pytest.approx(math.log(1.5) / math.log(2))

    def test_subcritical_classification(self):
        report = build_report(gasket_config(0.3))
        assert report.classification == "subcritical"

    def test_interior_possible_classification(self, line4_report):
        assert line4_report.classification == "interior-possible"
        assert line4_report.interior is not None
        assert line4_report.p_hat == line4_report.interior.p_hat
        assert line4_report.p_hat < 0.65

    def test_no_query_no_classification(self):
        config = replace(gasket_config(0.7), p=None)
        report = build_report(config)
        assert report.classification is None and report.dimension is None

    def test_mc_inside_bracket(self, gasket_report):
        assert gasket_report.lyapunov.contains(gasket_report.mc.value)

    def test_p_hat_absent_without_uset_or_shortcut(self, gasket_report):
        assert gasket_report.interior is None
        assert not gasket_report.colsum.applies
        assert gasket_report.p_hat is None

    def test_thread_count_does_not_change_bytes(self):
        config = gasket_config(0.7, bracket_length=10)
        one = report_document(build_report(config, threads=1)).to_text()
        three = report_document(build_report(config, threads=3)).to_text()
        assert one == three

    def test_same_config_same_bytes(self, gasket_report):
        again = build_report(gasket_config(0.7))
        assert report_document(gasket_report).to_text() == (
            report_document(again).to_text()
        )


class TestConsistencyInvariants:
    def test_extinction_above_measure_threshold(self, gasket_report):
        with pytest.raises(ConsistencyError):
            replace(gasket_report, p_extinct=0.9)

    def test_measure_threshold_above_one(self, gasket_report):
        bad = Bracket(lo=0.9, hi=1.2, lo_witness="", hi_witness="")
        with pytest.raises(ConsistencyError):
            replace(gasket_report, p_lebesgue=bad)

    def test_interior_threshold_below_certified_empty(self, line4_report):
        bad = Bracket(lo=0.99, hi=1.0, lo_witness="", hi_witness="")
        with pytest.raises(ConsistencyError):
            replace(line4_report, p_interior_empty=bad)


class TestReportDocument:
    def test_parses_back_and_has_all_blocks(self, gasket_report):
        doc = Document.parse(report_document(gasket_report).to_text())
        for name in (
            "report",
            "system",
            "budgets",
            "goodness",
            "lyapunov",
            "lyapunov-mc",
            "lsr",
            "thresholds",
            "interesting-interval",
            "typicality",
            "colsum-shortcut",
            "classification",
        ):
            assert doc.has(name), name
        assert len(doc.table("matrices").rows) == 2 * 2

    def test_classification_section_values(self, gasket_report):
        doc = Document.parse(report_document(gasket_report).to_text())
        sec = doc.section("classification")
        assert sec.get("p") == 0.7
        assert sec.get("class") == "positive-measure empty-interior (certified)"
        assert sec.get("dimension") is None

    def test_thresholds_section(self, gasket_report):
        doc = Document.parse(report_document(gasket_report).to_text())
        sec = doc.section("thresholds")
        assert sec.get("p-extinct") == pytest.approx(1 / 3)
        assert sec.get("p-lebesgue-hi") < 0.7
        assert sec.get("p-interior-empty-lo") == 1.0
        assert sec.get("p-hat") is None

    def test_interior_blocks_present_with_uset(self, line4_report):
        doc = Document.parse(report_document(line4_report).to_text())
        assert doc.has("interior")
        assert doc.has("test-vectors")
        assert doc.has("witness-map")
        assert doc.section("thresholds").get("p-hat") == line4_report.p_hat

    def test_no_source_references(self, gasket_report):
        import re

        text = report_document(gasket_report).to_text().lower()
        for banned in (r"\bpaper\b", r"\bspec\b", r"\btheorem\b", r"\blemma\b"):
            assert not re.search(banned, text)


class TestCertificates:
    def test_lyapunov_round_trip(self):
        family = example_family("gasket")
        bracket = lyapunov_bracket(family, 10)
        doc = bracket_certificate_document(family, "lyapunov", 10, bracket)
        assert verify_certificate_document(Document.parse(doc.to_text())) == "lyapunov"

    def test_lsr_round_trip_synthetic_family(self):
        family = example_family("doubling")
        bracket = lsr_bracket(family, 4)
        assert bracket.exact and bracket.lo == 2.0
        doc = bracket_certificate_document(family, "lsr", 4, bracket)
        assert verify_certificate_document(Document.parse(doc.to_text())) == "lsr"

    def test_typicality_round_trip(self, gasket_report):
        doc = typicality_certificate_document(
            gasket_report.family, gasket_report.typicality
        )
        kind = verify_certificate_document(Document.parse(doc.to_text()))
        assert kind == "typicality"

    def test_interior_round_trip(self):
        family = example_family("line4")
        uset = VectorFamily(((1, 0, 1, 0), (0, 1, 0, 1)))
        cert = interior_threshold(family, uset, 5)
        doc = interior_certificate_document(family, cert)
        assert verify_certificate_document(Document.parse(doc.to_text())) == "interior"

    def test_tampered_bracket_rejected(self):
        family = example_family("gasket")
        bracket = lyapunov_bracket(family, 10)
        doc = bracket_certificate_document(family, "lyapunov", 10, bracket)
        text = doc.to_text().replace(repr(bracket.lo), repr(bracket.lo - 0.01))
        with pytest.raises(CertificateError):
            verify_certificate_document(Document.parse(text))

    def test_tampered_matrices_rejected(self):
        family = example_family("gasket")
        bracket = lsr_bracket(family, 6)
        doc = bracket_certificate_document(family, "lsr", 6, bracket)
        text = doc.to_text().replace("0,0,1;0", "0,0,2;0")
        with pytest.raises(CertificateError) as err:
            verify_certificate_document(Document.parse(text))
        assert "disagree" in str(err.value)

    def test_tampered_interior_gamma_rejected(self):
        family = example_family("line4")
        uset = VectorFamily(((1, 0, 1, 0), (0, 1, 0, 1)))
        cert = interior_threshold(family, uset, 5)
        doc = interior_certificate_document(family, cert)
        text = doc.to_text().replace(
            f"gamma = {cert.gamma}", f"gamma = {cert.gamma + 1}"
        )
        with pytest.raises(CertificateError):
            verify_certificate_document(Document.parse(text))

    def test_unknown_kind_rejected(self):
        doc = Document()
        doc.add_section("certificate").set("kind", "nonsense")
        with pytest.raises(CertificateError):
            verify_certificate_document(doc)
