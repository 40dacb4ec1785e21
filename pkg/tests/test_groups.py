from __future__ import annotations

import json
from importlib import resources

from fewhate.corpus.records import canonicalize_group


def test_split_and_lowercase():
    assert canonicalize_group("Muslim folks, women") == ["muslim folks", "women"]


def test_empty_input():
    assert canonicalize_group("") == []
    assert canonicalize_group("  ,  ;  ") == []


def test_alias_table_merges_variants():
    assert canonicalize_group("Black folks; black people") == ["black folks"]
    assert canonicalize_group("jews") == ["jewish folks"]


def test_whitespace_collapse():
    assert canonicalize_group("  black   folks ") == ["black folks"]


def test_semicolon_and_comma_mix():
    assert canonicalize_group("women; muslims, women") == ["women", "muslims"]


def test_canonicalization_is_idempotent():
    for raw in ("black people, jews", "Trans People", "women; females"):
        once = canonicalize_group(raw)
        assert canonicalize_group(", ".join(once)) == once


def test_alias_table_is_its_own_fixpoint():
    raw = resources.files("fewhate.data").joinpath("group_aliases.json").read_text("utf-8")
    aliases = json.loads(raw)["aliases"]
    for variant, canonical in aliases.items():
        assert variant != canonical
        assert canonical not in aliases, f"alias target {canonical!r} is itself aliased"
