import csv
import io
import math

import numpy as np
import pytest

from spectral_cantor.cantor_points import CantorPoint, delta_gamma_codes, first_disagreement_codes
from spectral_cantor.fractal_embed import (
    EmbeddedCloud,
    F_gamma_codes,
    F_gamma_lipschitz,
    box_dimension,
    cantor_cloud,
    default_scales,
    e_gamma,
    embed_F_gamma,
    embed_f_gamma,
    f_gamma_codes,
    gh_correspondence_distance,
    gh_truncated_closed_form,
    gh_upper_bound,
    hausdorff_bounds,
    pairwise_distances,
    universal_space_membership,
    write_cloud_csv,
    write_dimension_csv,
)

LOG23 = math.log(2) / math.log(3)


class TestEGamma:
    @pytest.mark.parametrize("g,e", [(1 / 3, 1), (0.5, 2), (0.8, 4), (2 ** -0.25, 5), (0.3, 1), (0.9, 7)])
    def test_values(self, g, e):
        assert e_gamma(g) == e

    @pytest.mark.parametrize("g", [0.2, 0.5, 0.7, 0.95, 2 ** (-1 / 3)])
    def test_strict_half(self, g):
        assert g ** e_gamma(g) < 0.5
        assert F_gamma_lipschitz(g)[0] > 0


class TestFGamma:
    def test_examples(self):
        np.testing.assert_array_equal(embed_f_gamma(CantorPoint(0), 0.5, 6), np.zeros(6))
        v = embed_f_gamma(CantorPoint.parse("1"), 0.5, 4)
        np.testing.assert_allclose(v, [0.5, 0, 0, 0])
        with pytest.raises(ValueError):
            embed_f_gamma(CantorPoint.parse("0001"), 0.5, 3)

    @pytest.mark.parametrize("g", [0.3, 0.5, 0.8])
    def test_isometry(self, g, rng):
        L = 30
        a = rng.integers(0, 1 << L, 500)
        b = rng.integers(0, 1 << L, 500)
        d1 = np.abs(f_gamma_codes(a, g, L) - f_gamma_codes(b, g, L)).sum(1)
        np.testing.assert_allclose(d1, delta_gamma_codes(a, b, g, L), rtol=1e-12, atol=1e-15)

    def test_linf_is_first_term(self, rng):
        g, L = 0.6, 20
        a = rng.integers(0, 1 << L, 200)
        b = a ^ (rng.integers(1, 1 << L, 200))
        m = first_disagreement_codes(a, b)
        dinf = np.abs(f_gamma_codes(a, g, L) - f_gamma_codes(b, g, L)).max(1)
        np.testing.assert_allclose(dinf, g ** (m - 1.0) * (1 - g), rtol=1e-14)


class TestBigFGamma:
    def test_base_three_digits(self):
        L = 12
        pts = F_gamma_codes(np.arange(1 << L), 1 / 3, L)[:, 0]
        digits = np.rint(pts * 3**L).astype(np.int64)
        np.testing.assert_allclose(digits / 3**L, pts, atol=1e-12)
        for v in digits:
            while v:
                assert v % 3 in (0, 2)
                v //= 3

    def test_origin_and_dimension(self):
        assert embed_F_gamma(CantorPoint(0), 0.8, 8).shape == (4,)
        assert not embed_F_gamma(CantorPoint(0), 0.8, 8).any()

    @pytest.mark.parametrize("g", [0.3, 1 / 3, 0.5, 0.7, 0.9])
    def test_bi_lipschitz(self, g, rng):
        L = 40
        a = rng.integers(0, 1 << L, 2000, dtype=np.int64)
        b = rng.integers(0, 1 << L, 2000, dtype=np.int64)
        keep = a != b
        a, b = a[keep], b[keep]
        d = np.linalg.norm(F_gamma_codes(a, g, L) - F_gamma_codes(b, g, L), axis=1)
        delta = delta_gamma_codes(a, b, g, L)
        c, C = F_gamma_lipschitz(g)
        slack = g**L / (1 - g)
        assert np.all(c * delta - slack <= d + 1e-12)
        assert np.all(d <= C * delta + slack + 1e-12)


class TestClouds:
    def test_shapes_and_errors(self):
        c = cantor_cloud(0.5, 5, "D")
        assert c.points.shape == (32, 6) and c.norm_tag == "E-max"
        assert cantor_cloud(0.5, 5, "F").points.shape == (32, 2)
        with pytest.raises(ValueError):
            cantor_cloud(0.5, 5, "X")
        with pytest.raises(ValueError):
            cantor_cloud(0.5, 3, codes=[9])
        with pytest.raises(ValueError):
            EmbeddedCloud(np.zeros((2, 2)), "l3")
        with pytest.raises(MemoryError):
            cantor_cloud(0.5, 27)

    def test_pairwise(self):
        c = cantor_cloud(0.5, 4)
        D = pairwise_distances(c)
        np.testing.assert_allclose(D, D.T)
        codes = np.arange(16)
        np.testing.assert_allclose(D, delta_gamma_codes(codes[:, None], codes[None, :], 0.5, 4), atol=1e-15)

    @pytest.mark.parametrize("g", [0.3, 0.5, 0.75])
    def test_interval_diameter_attained(self, g):
        # within each level-n interval every point has a partner at distance gamma^n
        L, n = 10, 3
        codes = np.arange(1 << L)
        for s in range(1 << n):
            members = codes[(codes & ((1 << n) - 1)) == s]
            D = delta_gamma_codes(members[:, None], members[None, :], g, L)
            tail = g**L
            assert np.all(np.abs(D.max(1) - g**n) <= tail + 1e-15)


class TestBoxDimension:
    def test_cantor_third(self):
        c = cantor_cloud(1 / 3, 20, "f", codes=np.arange(1 << 16))  # supports within 16 <= 20
        est = box_dimension(c, scales=(1 / 3) ** np.arange(2, 13), method="interval")
        assert est.slope == pytest.approx(LOG23, abs=1e-9)
        assert est.residual < 1e-9

    def test_cantor_half(self):
        c = cantor_cloud(0.5, 14)
        est = box_dimension(c)
        assert est.method == "interval"
        assert est.slope == pytest.approx(1.0, abs=1e-9)

    def test_single_point(self):
        c = EmbeddedCloud(np.array([[0.3, 0.2]]))
        est = box_dimension(c, scales=np.geomspace(1, 1e-3, 6))
        assert est.slope == 0.0

    @pytest.mark.parametrize("g", [0.5, 0.7])
    def test_grid_on_f_cloud(self, g):
        c = cantor_cloud(g, 14, "f")
        est = box_dimension(c, method="grid")
        assert est.slope == pytest.approx(math.log(2) / -math.log(g), rel=1e-9)

    @pytest.mark.parametrize("g", [1 / 3, 0.5])
    def test_grid_on_F_cloud(self, g):
        c = cantor_cloud(g, 14, "F")
        est = box_dimension(c, method="grid")
        assert est.slope == pytest.approx(math.log(2) / -math.log(g), rel=1e-6)

    def test_generic_grid_segment(self):
        pts = np.column_stack([np.linspace(0, 1, 20000, endpoint=False), np.zeros(20000)])
        est = box_dimension(EmbeddedCloud(pts), scales=0.5 ** np.arange(1, 9), method="grid")
        assert est.slope == pytest.approx(1.0, abs=1e-12)
        assert est.counts[-1] == 256
        # default scales on generic data still give a rough estimate
        assert box_dimension(EmbeddedCloud(pts)).slope == pytest.approx(1.0, abs=0.1)

    def test_preconditions(self):
        c = cantor_cloud(0.5, 8)
        with pytest.raises(ValueError):
            box_dimension(c, scales=[0.5, 0.25, 0.125])
        with pytest.raises(ValueError):
            box_dimension(c, scales=[0.5, 0.25, 0.125, 0.0625])
        with pytest.raises(ValueError):
            box_dimension(c, scales=0.5 ** np.arange(1, 12), method="interval")
        with pytest.raises(ValueError):
            box_dimension(EmbeddedCloud(np.zeros((3, 2))), method="interval")
        with pytest.raises(ValueError):
            box_dimension(c, method="fancy")

    def test_default_scales_span(self):
        c = cantor_cloud(0.7, 14)
        for method in ("interval", "grid"):
            s = default_scales(c, method)
            assert math.log10(s.max() / s.min()) >= 2


class TestHausdorff:
    def test_third(self):
        h = hausdorff_bounds(1 / 3, 7)
        assert h["lower"] == pytest.approx(0.7742813263151215, rel=1e-14)
        assert h["upper"] == 1.0
        assert h["cover_sum"] == pytest.approx(1.0, abs=1e-12)

    def test_small_gamma(self):
        assert hausdorff_bounds(1e-9, 3)["lower"] > 0.99

    @pytest.mark.parametrize("n", [1, 10, 40])
    def test_cover_sum(self, n):
        for g in (0.1, 0.5, 0.9):
            assert hausdorff_bounds(g, n)["cover_sum"] == pytest.approx(1.0, abs=1e-12)


class TestGH:
    def test_upper_examples(self):
        assert gh_upper_bound(0.5, 0.25) == pytest.approx(1.0)
        assert gh_upper_bound(0.25, 0.5) == pytest.approx(1.0)
        assert gh_upper_bound(0.9, 0.1) == pytest.approx(16.0)
        assert gh_upper_bound(0.4, 0.4) == 0.0

    def test_correspondence(self):
        v = gh_correspondence_distance(0.5, 0.25, 12)
        assert v <= 1.0 + 2**-11
        assert gh_correspondence_distance(0.3, 0.3, 5) == 0.0
        with pytest.raises(ValueError):
            gh_correspondence_distance(0.5, 0.25, 0)

    @pytest.mark.parametrize("g,mu", [(0.5, 0.25), (0.9, 0.1), (0.6, 0.55), (0.3, 0.05), (0.95, 0.2)])
    def test_closed_form(self, g, mu):
        for L in (1, 4, 9, 12):
            assert gh_correspondence_distance(g, mu, L) == pytest.approx(
                gh_truncated_closed_form(g, mu, L), abs=1e-12
            )

    def test_closed_form_differs_from_plain_max(self):
        # matching the all-ones pattern also pays for the positive tail h(L), so the
        # value is below 2 max h(n) whenever the maximiser sits before L
        g, mu, L = 0.9, 0.1, 8
        n = np.arange(1, L + 1)
        h = g**n - mu**n
        assert gh_truncated_closed_form(g, mu, L) < 2 * h.max()


class TestMembership:
    def test_examples(self):
        v = np.zeros(8)
        v[0] = 0.25
        r = universal_space_membership(v)
        assert r.member and r.branch == "cantor" and r.gamma == pytest.approx(0.5)
        v = np.zeros(4)
        v[1] = 0.45
        r = universal_space_membership(v)
        assert not r.member and "envelope" in r.reason
        assert universal_space_membership(np.zeros(5)).branch == "zero"
        e1 = np.zeros(5)
        e1[0] = 1.0
        assert universal_space_membership(e1).branch == "e1"

    @pytest.mark.parametrize("g", [0.2, 0.5, 0.77])
    def test_recovers_pattern(self, g, rng):
        bits = rng.integers(0, 2, 12)
        bits[0] = 0
        bits[2] = 1
        v = (1 - g) ** 2 * g ** np.arange(12) * bits
        r = universal_space_membership(v)
        assert r.member and r.gamma == pytest.approx(g, rel=1e-9)
        assert r.bits == tuple(int(b) for b in bits)

    def test_outside(self):
        v = np.array([0.25, 0.2, 0.0])  # second coordinate should be 0.125 for gamma = 1/2
        assert not universal_space_membership(v).member
        assert not universal_space_membership([np.nan]).member


class TestCsv:
    def test_cloud_round_trip(self):
        c = cantor_cloud(0.3, 4, "F")
        buf = io.StringIO()
        write_cloud_csv(c, buf)
        rows = list(csv.reader(io.StringIO(buf.getvalue())))
        assert rows[0] == ["x1", "gamma", "level", "bits"]
        assert len(rows) == 17
        back = np.array([[float(r[0])] for r in rows[1:]])
        np.testing.assert_array_equal(back, c.points)
        assert rows[2][-1] == "1000"

    def test_dimension_table(self, tmp_path):
        est = box_dimension(cantor_cloud(0.5, 10))
        p = tmp_path / "dim.csv"
        write_dimension_csv(est, p)
        rows = list(csv.reader(p.open()))
        assert rows[0] == ["log_eps", "log_N"] and len(rows) == 11
        assert float(rows[3][1]) == pytest.approx(3 * math.log(2))
