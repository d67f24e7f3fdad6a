import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from avscan import bundled_store_dir, fixture_dir          # noqa: E402
from avscan.avs import load_store                          # noqa: E402
from avscan.cfgir import function_sequence                 # noqa: E402
from avscan.frontend import parse_source                   # noqa: E402
from avscan.normalize import collect_type_names, normalize_function   # noqa: E402


def fixture_path(name):
    return fixture_dir() / name


def fixture_text(name):
    return fixture_path(name).read_text(encoding="utf-8")


def parse_fixture(name):
    return parse_source(fixture_text(name), name)


def first_function(unit, fn_name=None, skip_ctor=True):
    for contract in unit.contracts:
        for fn in contract.functions:
            if fn.body is None:
                continue
            if skip_ctor and fn.is_constructor:
                continue
            if fn_name is not None and fn.name != fn_name:
                continue
            return contract, fn
    raise LookupError(f"function {fn_name!r} not found")


def segment_of(name, fn_name=None):
    unit = parse_fixture(name)
    contract, fn = first_function(unit, fn_name)
    return normalize_function(fn, contract, collect_type_names(unit))


def sequence_of(name, fn_name=None):
    unit = parse_fixture(name)
    contract, fn = first_function(unit, fn_name)
    return function_sequence(fn, contract, collect_type_names(unit))


@pytest.fixture(scope="session")
def store():
    sigs = load_store(bundled_store_dir())
    assert sigs, "bundled signature store missing; run scripts/build_store.py"
    return sigs
