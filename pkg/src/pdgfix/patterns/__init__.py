"""The shipped pattern set and the example pairs it is compiled from."""

from __future__ import annotations

from pathlib import Path

HERE = Path(__file__).resolve().parent
BUILTIN_DIR = HERE / "builtin"
EXAMPLES_DIR = HERE / "examples"

DESCRIPTIONS = {
    "aug-assign": "Use augmented assignment instead of repeating the target",
    "dict-keys": "Iterate over the dictionary directly instead of calling .keys()",
    "enumerate": "Use enumerate() instead of indexing with range(len(...))",
    "len-zero": "Test the container's truth value instead of comparing len() to 0",
    "log1p": "Use np.log1p(x) instead of np.log(x + 1) for accuracy near zero",
    "merge-isinstance": "Merge isinstance() calls on the same object into one tuple check",
    "none-compare": "Compare with None using 'is', not '=='",
    "not-in": "Use 'x not in y' instead of 'not x in y'",
    "type-check": "Use isinstance() instead of comparing type() results",
}


def build(out_dir=BUILTIN_DIR, examples_dir=EXAMPLES_DIR) -> list[Path]:
    """Compile every example directory into ``out_dir``; returns written paths."""
    from ..bundleio import save_bundle
    from ..patterncompile import compile_pattern, load_examples

    out_dir, examples_dir = Path(out_dir), Path(examples_dir)
    written = []
    for sub in sorted(p for p in examples_dir.iterdir() if p.is_dir()):
        bundle = compile_pattern(load_examples(sub), sub.name, DESCRIPTIONS.get(sub.name, sub.name))
        path = out_dir / f"{sub.name}.pattern.json"
        save_bundle(bundle, path)
        written.append(path)
    return written
