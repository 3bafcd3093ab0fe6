"""Loading configs, figure presets and network files."""

import json
from pathlib import Path

import yaml

from negperc.sp_reduce import QNGraph
from negperc.utils import DomainError

PRESETS_PATH = Path(__file__).parent / "config" / "presets.yaml"


def config_yaml_import(file_name: str):
    """
    Import config.yaml.

    Parameters
    ----------
    file_name : str
        Path to config.yaml

    Returns
    -------
    dict
        For inputting into FeedbackProcessor or the command line
    """
    with open(file_name) as yaml_file:
        processing_parameters = yaml.safe_load(yaml_file)

    if processing_parameters is None:
        return {}
    if not isinstance(processing_parameters, dict):
        raise DomainError(f"Config {file_name} must hold a mapping at the top level")
    if "horizon" in processing_parameters and processing_parameters["horizon"] == "inf":
        raise DomainError("Feedback horizon must be finite")

    return processing_parameters


def load_presets(file_name=None):
    """
    Figure presets keyed by name.

    Parameters
    ----------
    file_name : str, optional
        Presets YAML, default the packaged config/presets.yaml

    Returns
    -------
    dict of str-dict pairs
    """
    return config_yaml_import(file_name or PRESETS_PATH)


def get_preset(name, file_name=None):
    """Return the preset matching the given name, raising DomainError if unknown."""
    presets = load_presets(file_name)
    if name not in presets:
        raise DomainError(f"Unknown preset {name!r}, available: {', '.join(sorted(presets))}")
    return presets[name]


def _node(token):
    try:
        return int(token)
    except ValueError:
        return token


def import_edge_list(file_name: str, name=None):
    """
    Read a network from an edge-list text file.

    Lines hold ``u v chi``; ``S: a b`` and ``T: c`` name the terminal sets and
    ``#`` starts a comment. Integer node labels are read as ints.

    Parameters
    ----------
    file_name : str
        Path to the edge list
    name : str, optional
        Network name, default the file stem

    Returns
    -------
    QNGraph
    """
    links, source, target = [], [], []
    with open(file_name) as edge_file:
        for number, raw in enumerate(edge_file, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            head, _, rest = line.partition(":")
            if rest and head.strip() in ("S", "T"):
                nodes = [_node(token) for token in rest.split()]
                (source if head.strip() == "S" else target).extend(nodes)
                continue
            parts = line.split()
            if len(parts) != 3:
                raise DomainError(f"{file_name}:{number}: expected 'u v chi', got {line!r}")
            try:
                chi = float(parts[2])
            except ValueError as e:
                raise DomainError(f"{file_name}:{number}: bad chi {parts[2]!r}") from e
            links.append((_node(parts[0]), _node(parts[1]), chi))
    return QNGraph(links, source, target, name=name or Path(file_name).stem)


def import_graph_json(file_name: str, name=None):
    """
    Read a network from JSON with keys source, target and links.

    Parameters
    ----------
    file_name : str
        Path to the JSON file
    name : str, optional
        Network name, default the "name" key or the file stem

    Returns
    -------
    QNGraph
    """
    with open(file_name) as json_file:
        try:
            spec = json.load(json_file)
        except json.JSONDecodeError as e:
            raise DomainError(f"{file_name} is not valid JSON: {e}") from e
    missing = {"source", "target", "links"} - set(spec)
    if missing:
        raise DomainError(f"{file_name} is missing {sorted(missing)}")
    links = [(u, v, chi) for u, v, chi in spec["links"]]
    return QNGraph(
        links,
        spec["source"],
        spec["target"],
        name=name or spec.get("name", Path(file_name).stem),
    )


def import_graph(file_name: str, name=None):
    """Read a network, JSON for .json files and an edge list otherwise."""
    if Path(file_name).suffix.lower() == ".json":
        return import_graph_json(file_name, name=name)
    return import_edge_list(file_name, name=name)
