"""Built-in scenario registry.

Named scenarios ship as INI fixtures inside the package; any other
string is treated as a filesystem path.
"""

from importlib import resources

from .config import load_scenario_file, load_scenario_text
from .errors import ConfigurationError


def _fixture_dir():
    return resources.files(__package__) / "scenarios"


def list_scenarios():
    """Sorted names of the built-in scenarios."""
    names = []
    for entry in _fixture_dir().iterdir():
        if entry.name.endswith(".ini"):
            names.append(entry.name[:-4])
    return sorted(names)


def scenario_text(name):
    entry = _fixture_dir() / (name + ".ini")
    if not entry.is_file():
        raise ConfigurationError(f"unknown built-in scenario {name!r}")
    return entry.read_text(encoding="utf-8")


def load_scenario(name_or_path):
    """Load a built-in scenario by name, or any INI file by path."""
    if name_or_path in list_scenarios():
        return load_scenario_text(scenario_text(name_or_path),
                                  name_hint=name_or_path)
    return load_scenario_file(name_or_path)


def describe_scenarios():
    """(name, description) pairs for all built-ins."""
    out = []
    for name in list_scenarios():
        cfg = load_scenario_text(scenario_text(name), name_hint=name)
        out.append((name, cfg.description))
    return out
