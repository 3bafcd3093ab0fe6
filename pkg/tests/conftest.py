"""Fixtures to be shared across many pytests."""
import pytest


@pytest.fixture()
def feedback_config_file():
    """
    PyTest fixture providing the path to a short feedback run config.

    Returns
    -------
    str
        The file path to the YAML config.

    Notes
    -----
    The config holds a two time unit DV run with dt = 1e-3, the classification
    band and window, an export file name and the annalist settings.
    """
    return "tests/test_data/feedback_config.yaml"


@pytest.fixture()
def preset_config_file():
    """Path to a config that starts from the fig2-cv preset."""
    return "tests/test_data/preset_config.yaml"


@pytest.fixture()
def edge_list_file():
    """
    PyTest fixture providing the path to an edge-list network.

    Returns
    -------
    str
        The file path to the edge list.

    Notes
    -----
    The network is series-parallel with source set {0, 5} and target set {4}.
    """
    return "tests/test_data/mixed_network.txt"


@pytest.fixture()
def bridge_json_file():
    """Path to a Wheatstone bridge network in JSON."""
    return "tests/test_data/bridge_network.json"


@pytest.fixture()
def chain_json_file():
    """Path to a three-link chain network in JSON without a name."""
    return "tests/test_data/chain_network.json"


@pytest.fixture()
def sponge_options_file():
    """Path to a YAML file of options for the sponge command."""
    return "tests/test_data/sponge_options.yaml"
