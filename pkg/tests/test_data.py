import math

import numpy as np
import pytest

from svhmc.data import (
    DataError,
    PriceSeries,
    SyntheticSpec,
    generate_sv_series,
    prices_to_returns,
    read_chain_csv,
    read_column_csv,
    read_price_csv,
    write_chain_csv,
    write_column_csv,
    write_price_csv,
)
from svhmc.model import SvParams
from svhmc.rng import RngStream
from svhmc.samplers import ChainConfig, ChainSample, run_chain

TRUE = SvParams(mu=-1.0, phi=0.97, sigma_eta2=0.05)


class TestGenerator:
    def test_stationary_moments(self):
        _, h = generate_sv_series(SyntheticSpec(TRUE, 10**6, seed=3))
        assert h.var() == pytest.approx(0.05 / (1 - 0.97**2), rel=0.02)
        hc = h - h.mean()
        assert np.dot(hc[1:], hc[:-1]) / np.dot(hc, hc) == pytest.approx(0.97, abs=0.01)

    def test_replays_recursion(self):
        spec = SyntheticSpec(SvParams(0.3, -0.4, 0.2), 50, seed=11)
        y, h = generate_sv_series(spec)
        rng = RngStream(11)
        z, eps = rng.normal(50), rng.normal(50)
        expect = np.empty(50)
        expect[0] = 0.3 + math.sqrt(0.2 / (1 - 0.16)) * z[0]
        for t in range(1, 50):
            expect[t] = 0.3 - 0.4 * (expect[t - 1] - 0.3) + math.sqrt(0.2) * z[t]
        np.testing.assert_allclose(h, expect, rtol=1e-14)
        np.testing.assert_allclose(y, np.exp(expect / 2) * eps, rtol=1e-14)

    def test_zero_innovation_variance(self):
        y, h = generate_sv_series(SyntheticSpec(SvParams(0.4, 0.9, 0.0), 20000, seed=2))
        np.testing.assert_array_equal(h, 0.4)
        assert y.var() == pytest.approx(math.exp(0.4), rel=0.05)

    def test_deterministic(self):
        a = generate_sv_series(SyntheticSpec(TRUE, 300, seed=7))
        b = generate_sv_series(SyntheticSpec(TRUE, 300, seed=7))
        c = generate_sv_series(SyntheticSpec(TRUE, 300, seed=8))
        np.testing.assert_array_equal(a[0], b[0])
        assert not np.array_equal(a[0], c[0])

    def test_single_point(self):
        y, h = generate_sv_series(SyntheticSpec(TRUE, 1, seed=0))
        assert y.shape == h.shape == (1,)

    def test_bad_length(self):
        with pytest.raises(ValueError):
            SyntheticSpec(TRUE, 0)


class TestReturns:
    def test_constant_prices(self):
        np.testing.assert_array_equal(prices_to_returns([50.0] * 6), np.zeros(5))

    def test_hand_example(self):
        r = prices_to_returns([100.0, 110.0, 100.0])
        np.testing.assert_allclose(r, [100 * math.log(1.1), -100 * math.log(1.1)], rtol=1e-12)
        assert r[0] == pytest.approx(9.531, abs=1e-3)

    def test_mean_removed(self, rng):
        p = np.exp(np.cumsum(0.01 * rng.normal(size=1000))) * 100
        r = prices_to_returns(p)
        assert r.size == 999
        assert abs(r.sum()) < 1e-9

    def test_rejects_nonpositive(self):
        with pytest.raises(DataError):
            prices_to_returns([1.0, 0.0, 2.0])
        with pytest.raises(DataError):
            prices_to_returns([1.0])


class TestPriceCsv:
    def test_minimal(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("close\n100\n110\n")
        s = read_price_csv(f)
        assert len(s) == 2 and s.dates is None

    def test_negative_names_line(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("close\n100\n-5\n")
        with pytest.raises(DataError, match=":3:"):
            read_price_csv(f)

    def test_dated_and_blank_lines(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("date,close\n2001-01-04,13691.49\n\n2001-01-05,13867.61\n")
        s = read_price_csv(f)
        assert s.dates == ("2001-01-04", "2001-01-05")
        np.testing.assert_array_equal(s.prices, [13691.49, 13867.61])

    @pytest.mark.parametrize("text", ["price\n1\n2\n", "close\n1\nabc\n", "date,close\n2001,1,2\n", ""])
    def test_malformed(self, tmp_path, text):
        f = tmp_path / "p.csv"
        f.write_text(text)
        with pytest.raises(DataError):
            read_price_csv(f)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            read_price_csv(tmp_path / "nope.csv")

    @pytest.mark.parametrize("dated", [False, True])
    def test_round_trip(self, tmp_path, rng, dated):
        p = 100 * np.exp(np.cumsum(0.02 * rng.normal(size=500)))
        dates = tuple(f"d{i}" for i in range(500)) if dated else None
        write_price_csv(PriceSeries(p, dates), tmp_path / "p.csv")
        back = read_price_csv(tmp_path / "p.csv")
        np.testing.assert_allclose(back.prices, p, rtol=1e-12)
        assert back.dates == dates

    def test_column_round_trip(self, tmp_path, reference_series):
        y, _ = reference_series
        write_column_csv(y, tmp_path / "y.csv", "y")
        np.testing.assert_allclose(read_column_csv(tmp_path / "y.csv", "y"), y, rtol=1e-12)
        with pytest.raises(DataError):
            read_column_csv(tmp_path / "y.csv", "h")


@pytest.fixture(scope="module")
def chain(reference_series):
    cfg = ChainConfig(burn_in=20, n_record=30, seed=4, tracked_latents=(10, 20, 100))
    return run_chain(reference_series[0][:200], cfg)


class TestChainCsv:
    def test_header(self, tmp_path, chain):
        write_chain_csv(chain, tmp_path / "c.csv")
        header = (tmp_path / "c.csv").read_text().splitlines()[0]
        assert header.startswith("iteration,phi,mu,sigma_eta2,accept,delta_h")
        assert header.endswith("h_10,h_20,h_100")

    def test_single_sample(self, tmp_path):
        s = ChainSample(1, TRUE, np.array([0.5]), 1.0, -0.25)
        write_chain_csv([s], tmp_path / "c.csv", tracked_latents=(3,))
        assert len((tmp_path / "c.csv").read_text().splitlines()) == 2

    def test_round_trip(self, tmp_path, chain):
        write_chain_csv(chain, tmp_path / "c.csv")
        back = read_chain_csv(tmp_path / "c.csv")
        np.testing.assert_array_equal(back["iteration"], chain.iteration)
        for name in ("phi", "mu", "sigma_eta2", "delta_h"):
            np.testing.assert_allclose(back[name], getattr(chain, name), rtol=1e-15)
        np.testing.assert_allclose(back["accept"], chain.acceptance, rtol=1e-15)
        np.testing.assert_allclose(back["h_100"], chain.tracked_h[:, 2], rtol=1e-15)

    def test_requires_labels_for_plain_sequence(self, tmp_path):
        s = ChainSample(1, TRUE, np.array([0.5]), 1.0, 0.0)
        with pytest.raises(ValueError):
            write_chain_csv([s], tmp_path / "c.csv")

    def test_bad_header(self, tmp_path):
        f = tmp_path / "c.csv"
        f.write_text("a,b\n1,2\n")
        with pytest.raises(DataError, match=":1:"):
            read_chain_csv(f)
