import numpy as np
import pytest

from radnorm.corpus import GAUSSIAN_RADIUS, corpus, corpus_suite, load_registry, parse_profile
from radnorm.profiles import modulus_slope

t = np.linspace(-3.0, 3.0, 601)


def test_registry_entries_have_params():
  registry = load_registry()
  assert set(registry) >= {"gaussian", "cusp", "plateau", "ring", "chirp", "twin", "suite"}
  assert all(isinstance(entry["description"], str) for name, entry in registry.items() if name != "suite")
  assert registry["ring"]["params"] == {"a": 1.0, "w": 0.5}


def test_gaussian():
  g = corpus("gaussian", 1.0)
  assert g(0.0) == 1.0
  assert g.support_radius is None
  assert g.outer_radius() == GAUSSIAN_RADIUS
  assert g(GAUSSIAN_RADIUS) < 1e-15


def test_cusp_is_even_and_supported_in_two():
  g = corpus("cusp", 0.6)
  values = g(t)
  assert np.array_equal(values, g(-t))
  assert np.all(values[np.abs(t) >= 2.0] == 0.0)
  assert g(0.0) == 0.0
  assert g.smoothness_hint == 0.6


def test_corpus_defaults_and_keywords():
  assert corpus("ring").name == "ring:1,0.5"
  assert corpus("ring", w=0.25).support_radius == 1.25
  assert corpus("plateau")(0.9) == 1.0
  with pytest.raises(ValueError):
    corpus("ring", 1.0, 0.5, 2.0)
  with pytest.raises(ValueError):
    corpus("ring", width=0.3)


def test_corpus_rejects_bad_parameters():
  with pytest.raises(ValueError):
    corpus("cusp", 1.5)
  with pytest.raises(ValueError):
    corpus("gaussian", 0.0)
  with pytest.raises(ValueError):
    corpus("sawtooth")


def test_parse_profile():
  assert parse_profile("cusp:0.3").name == "cusp:0.3"
  assert parse_profile(" ring : 1.5,0.2 ").support_radius == pytest.approx(1.7)
  assert parse_profile("plateau").name == "plateau"
  with pytest.raises(ValueError):
    parse_profile("Gaussian:1")
  with pytest.raises(ValueError):
    parse_profile("cusp:abc")


def test_suite():
  suite = corpus_suite()
  assert len(suite) == 6
  assert [g.name for g in suite][:3] == ["gaussian:1", "cusp:0.6", "plateau"]


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.7])
def test_cusp_modulus_slope(beta):
  fit = modulus_slope(corpus("cusp", beta), 2.0, h_range=(1e-4, 1e-2))
  assert fit.slope == pytest.approx(beta + 0.5, abs=0.05)


@pytest.mark.parametrize("name", ["gaussian", "cusp", "plateau", "ring", "chirp", "twin"])
def test_every_registry_entry_builds_with_defaults(name):
  g = corpus(name)
  assert g.name.startswith(name)
  values = g(t)
  assert np.all(np.isfinite(values))
  assert np.array_equal(values, g(-t))
  assert parse_profile(name).name == g.name


def test_twin_has_a_peak_and_a_dip():
  g = corpus("twin")
  assert g.name == "twin:1,1.5,0.2"
  assert g(1.0) == 1.0 and g(1.5) == -1.0
  assert g(1.25) == 0.0 and g(0.5) == 0.0
  assert g.support_radius == pytest.approx(1.7)
