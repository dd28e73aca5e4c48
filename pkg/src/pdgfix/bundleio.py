"""Read and write pattern bundles as ``.pattern.json`` documents."""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .errors import (DanglingReference, DuplicateId, IoError, ParseError, PdgfixError,
                     SchemaError, VersionError)
from .fgpdg import Pdg, PdgNode
from .matcher import MODE_RANK, MatchingMode
from .patterncompile import SCHEMA_VERSION, PatternBundle, script_references
from .treediff import OPS, EditAction, apply_edit_script

SUFFIX_EXT = ".pattern.json"

_ID = {"type": "integer"}
_TEXT = {"type": "string"}

BUNDLE_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "id", "description", "graph", "modes", "script",
                 "canonical_source", "bound_names"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"type": "integer", "minimum": 1},
        "id": {"type": "string", "pattern": r"^[A-Za-z0-9_.\-]+$"},
        "description": _TEXT,
        "canonical_source": _TEXT,
        "graph": {
            "type": "object",
            "required": ["vertices", "edges"],
            "additionalProperties": False,
            "properties": {
                "vertices": {"type": "array", "items": {
                    "type": "object",
                    "required": ["id", "kind", "subkind", "label", "syntax_refs"],
                    "additionalProperties": False,
                    "properties": {
                        "id": _ID,
                        "kind": {"enum": ["data", "operation", "control"]},
                        "subkind": _TEXT,
                        "label": _TEXT,
                        "syntax_refs": {"type": "array", "items": _ID},
                        "anchor": {"type": "boolean"},
                    },
                }},
                "edges": {"type": "array", "items": {
                    "type": "object",
                    "required": ["src", "dst", "kind", "label"],
                    "additionalProperties": False,
                    "properties": {"src": _ID, "dst": _ID, "kind": _TEXT, "label": _TEXT},
                }},
            },
        },
        "modes": {
            "type": "object",
            "patternProperties": {r"^[0-9]+$": {
                "type": "object",
                "required": ["variant"],
                "additionalProperties": False,
                "properties": {
                    "variant": {"enum": sorted(MODE_RANK)},
                    "suffix": _TEXT,
                    "placeholder": {"type": ["string", "null"]},
                },
            }},
            "additionalProperties": False,
        },
        "script": {"type": "array", "items": {
            "type": "object",
            "required": ["op", "node"],
            "properties": {
                "op": {"enum": list(OPS)},
                "node": _ID,
                "kind": _TEXT,
                "label": _TEXT,
                "parent": _ID,
                "position": {"type": "integer", "minimum": 0},
                "new_label": _TEXT,
            },
            "additionalProperties": False,
        }},
        "bound_names": {"type": "object", "additionalProperties": _ID},
    },
}


jsonschema.Draft202012Validator.check_schema(BUNDLE_SCHEMA)
_VALIDATOR = jsonschema.Draft202012Validator(BUNDLE_SCHEMA)


def bundle_to_dict(bundle: PatternBundle) -> dict:
    g = bundle.graph
    vertices = []
    for v in sorted(g.vertices):
        n = g.vertices[v]
        d = {"id": n.id, "kind": n.kind, "subkind": n.subkind, "label": n.label,
             "syntax_refs": list(n.syntax_refs)}
        if n.anchor:
            d["anchor"] = True
        vertices.append(d)
    edges = [{"src": e.src, "dst": e.dst, "kind": e.kind, "label": e.label}
             for e in sorted(g.edges)]
    modes = {}
    for v in sorted(bundle.modes):
        m = bundle.modes[v]
        d = {"variant": m.variant}
        if m.suffix:
            d["suffix"] = m.suffix
        if m.placeholder is not None:
            d["placeholder"] = m.placeholder
        modes[str(v)] = d
    return {
        "schema_version": bundle.schema_version,
        "id": bundle.id,
        "description": bundle.description,
        "graph": {"vertices": vertices, "edges": edges},
        "modes": modes,
        "script": [a.to_dict() for a in bundle.script],
        "canonical_source": bundle.canonical_source,
        "bound_names": dict(sorted(bundle.bound_names.items())),
    }


def bundle_from_dict(doc) -> PatternBundle:
    if isinstance(doc, dict) and isinstance(doc.get("schema_version"), int) \
            and doc["schema_version"] > SCHEMA_VERSION:
        raise VersionError(f"schema version {doc['schema_version']} is newer than "
                           f"supported version {SCHEMA_VERSION}")
    e = jsonschema.exceptions.best_match(_VALIDATOR.iter_errors(doc))
    if e is not None:
        where = "/".join(str(p) for p in e.absolute_path)
        index = None
        path = list(e.absolute_path)
        if len(path) >= 2 and path[0] == "script" and isinstance(path[1], int):
            index = path[1]
        raise SchemaError(f"{where or 'document'}: {e.message}", index) from None

    script = []
    for i, a in enumerate(doc["script"]):
        try:
            script.append(EditAction.from_dict(a))
        except (TypeError, ValueError) as e:
            raise SchemaError(f"script/{i}: {e}", i) from None

    g = Pdg()
    try:
        for v in doc["graph"]["vertices"]:
            if v["id"] in g.vertices:
                raise SchemaError(f"duplicate vertex id {v['id']}")
            g.add_vertex(PdgNode(v["id"], v["kind"], v["subkind"], v["label"],
                                 tuple(v["syntax_refs"]), v.get("anchor", False)))
    except ValueError as e:
        raise SchemaError(f"graph: {e}") from None
    for e in doc["graph"]["edges"]:
        if e["src"] not in g.vertices or e["dst"] not in g.vertices:
            raise SchemaError(f"edge {e['src']}->{e['dst']} references a missing vertex")
        g.add_edge(e["src"], e["dst"], e["kind"], e["label"])

    modes = {}
    for k, m in doc["modes"].items():
        v = int(k)
        if v not in g.vertices or g.vertices[v].kind != "data":
            raise SchemaError(f"mode for vertex {v}, which is not a data vertex")
        try:
            modes[v] = MatchingMode(m["variant"], m.get("suffix", ""), m.get("placeholder"))
        except ValueError as e:
            raise SchemaError(f"modes/{k}: {e}") from None
    for ph, v in doc["bound_names"].items():
        if v not in modes or modes[v].placeholder != ph:
            raise SchemaError(f"bound name {ph} does not refer to a vertex with that placeholder")

    try:
        bundle = PatternBundle(doc["id"], doc["description"], g, modes, script,
                               doc["canonical_source"], dict(doc["bound_names"]),
                               doc["schema_version"])
    except ParseError as e:
        raise SchemaError(f"canonical_source: {e}") from None

    tree = bundle.canonical_tree
    for v in g.vertices.values():
        for r in v.syntax_refs:
            if r not in tree.nodes:
                raise SchemaError(f"vertex {v.id} refers to unknown syntax node {r}")
    covered = {r for v in g.vertices.values() for r in v.syntax_refs}
    for i, a in enumerate(script):
        for r in script_references([a]):
            if r not in tree.nodes:
                raise SchemaError(f"script/{i}: reference {r} does not exist", i)
            if r not in covered:
                raise SchemaError(f"script/{i}: reference {r} has no graph vertex", i)
    try:
        apply_edit_script(tree, script)
    except DanglingReference as e:
        raise SchemaError(f"script/{e.index}: {e}", e.index) from None
    return bundle


def dumps(bundle: PatternBundle) -> str:
    return json.dumps(bundle_to_dict(bundle), indent=2, ensure_ascii=False) + "\n"


def loads(text: str) -> PatternBundle:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from None
    return bundle_from_dict(doc)


def save_bundle(bundle: PatternBundle, path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(bundle), encoding="utf-8")
    except OSError as e:
        raise IoError(f"{path}: {e}") from e


def load_bundle(path) -> PatternBundle:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise IoError(f"{path}: {e}") from e
    try:
        return loads(text)
    except (SchemaError, VersionError) as e:
        e.args = (f"{path}: {e}",)
        raise


def load_pattern_set(directory, strict: bool = False, errors: list | None = None) -> list[PatternBundle]:
    """Load every bundle file of ``directory``, sorted by id.

    Malformed files are appended to ``errors`` as ``(path, error)`` and
    skipped, unless ``strict`` is set.  Duplicate ids always raise.
    """
    root = Path(directory)
    if not root.is_dir():
        raise IoError(f"{root}: not a directory")
    bundles: dict[str, tuple[Path, PatternBundle]] = {}
    for path in sorted(root.glob("*" + SUFFIX_EXT)):
        try:
            b = load_bundle(path)
        except PdgfixError as e:
            if strict:
                raise
            if errors is not None:
                errors.append((path, e))
            continue
        if b.id in bundles:
            raise DuplicateId(f"pattern id {b.id!r} in both {bundles[b.id][0]} and {path}")
        bundles[b.id] = (path, b)
    return [bundles[k][1] for k in sorted(bundles)]
