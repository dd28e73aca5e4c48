"""Graph-based change pattern linter and fixer for Python."""

from .applier import analyze_source, apply_fix, fix_source, remap_script
from .bundleio import load_bundle, load_pattern_set, save_bundle
from .fgpdg import Pdg, build_fgpdg
from .matcher import MatchingMode, find_matches
from .patterncompile import PatternBundle, PatternInstance, compile_pattern
from .syntax import parse_source
from .printer import render
from .treediff import apply_edit_script, diff

__all__ = [
    "Pdg", "MatchingMode", "PatternBundle", "PatternInstance",
    "analyze_source", "apply_edit_script", "apply_fix", "build_fgpdg", "compile_pattern", "diff",
    "find_matches", "fix_source", "load_bundle", "load_pattern_set", "parse_source",
    "remap_script", "render", "save_bundle",
]

__version__ = "0.1.0"
