"""Sphinx configuration for the negperc documentation."""

import os
import sys

sys.path.insert(0, os.path.abspath(".."))

import negperc  # noqa: E402

project = "negperc"
author = "negperc developers"
copyright = f"2026, {author}"
version = release = negperc.__version__

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.viewcode",
]
autodoc_member_order = "bysource"
napoleon_numpy_docstring = True

master_doc = "index"
exclude_patterns = ["_build"]
html_theme = "furo"
