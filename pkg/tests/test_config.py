import json

import pytest

from vqe_forge.config import ConfigError, load_config, parse_config
from vqe_forge.cli import load_preset, preset_names


def base(**kw):
    raw = {"method": "vqe", "hamiltonian": {"bundled": "h2"}}
    raw.update(kw)
    return raw


def test_defaults_resolve():
    cfg = parse_config(base())
    assert cfg.seed == 0 and cfg.ansatz == "uccsd"
    assert cfg.optimizer.method == "adam"
    d = cfg.to_dict()
    assert d["optimizer"]["learning_rate"] == cfg.optimizer.learning_rate
    json.dumps(d)


@pytest.mark.parametrize("raw,pointer", [
    ({"hamiltonian": {"bundled": "h2"}}, "/method"),
    (base(method="vqee"), "/method"),
    ({"method": "vqe"}, "/hamiltonian"),
    (base(hamiltonian={"bundled": "h2", "pauli": "x.pauli"}), "/hamiltonian"),
    (base(hamiltonian={}), "/hamiltonian"),
    (base(hamiltonian={"bundled": "h2", "active_space": {"active": [0]}}), "/hamiltonian/active_space"),
    (base(hamiltonian={"bundled": "h2", "mapping": "bk"}), "/hamiltonian/mapping"),
    (base(seed="one"), "/seed"),
    (base(seed=-1), "/seed"),
    (base(optimizer={"learning_rate": -1.0}), "/optimizer"),
    (base(optimizer=[1]), "/optimizer"),
    (base(zne={"scale_factors": [1, 2]}), "/zne"),
    (base(method="trex-experiment"), "/noise"),
    (base(method="forge"), "/forging"),
    (base(method="compare", compare={"methods": ["vqe", "diag"]}), "/compare/methods/1"),
    (base(noise={"p2": 2.0}), "/noise"),
    (base(ansatz="hea"), "/ansatz"),
])
def test_config_errors_carry_pointer(raw, pointer):
    with pytest.raises(ConfigError) as exc:
        parse_config(raw)
    assert exc.value.pointer == pointer
    assert str(exc.value).startswith(pointer)


def test_missing_block_is_named():
    with pytest.raises(ConfigError, match="noise"):
        parse_config(base(method="trex-experiment"))


def test_unknown_key_warns_with_suggestion():
    cfg = parse_config(base(optimiser={"max_iterations": 3}, optimizer={"learning_rat": 0.1}))
    assert any("unknown key /optimiser" in w and "'optimizer'" in w for w in cfg.warnings)
    assert any("/optimizer/learning_rat" in w and "'learning_rate'" in w for w in cfg.warnings)
    assert cfg.optimizer.learning_rate != 0.1


def test_compare_overrides():
    cfg = parse_config(base(method="compare", adapt={"eps_adapt": 1e-3},
                            compare={"methods": ["vqe", "tetris"],
                                     "overrides": {"tetris": {"eps_adapt": 2e-5}}}))
    assert cfg.adapt_config("tetris").eps_adapt == 2e-5
    assert cfg.adapt_config("vqe").eps_adapt == 1e-3


def test_mitigation_defaults():
    cfg = parse_config(base(method="zne-experiment", seed=4, noise={"p2": 0.004},
                            mitigation={"n_seeds": 3}))
    assert cfg.mitigation_seeds() == [4, 5, 6]
    assert cfg.mitigation_methods() == ("none", "zne")


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  \"method\": \n}")
    with pytest.raises(ConfigError, match="line"):
        load_config(bad)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")


def test_presets_all_validate():
    names = preset_names()
    assert {"compare-all", "diag-beh2", "mitigation-beh2-3o", "forging-beh2-2o"} <= set(names)
    for name in names:
        cfg = parse_config(load_preset(name))
        assert not cfg.warnings, (name, cfg.warnings)
