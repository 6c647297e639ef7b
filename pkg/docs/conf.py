import os
import sys

sys.path.insert(0, os.path.abspath("../src"))
# Configuration file for the Sphinx documentation builder.
#
# For the full list of built-in configuration values, see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Project information -----------------------------------------------------

project = "cfcomm"
copyright = "2026, cfcomm contributors"
author = "cfcomm contributors"
release = "0.3.0"
version = "0.3.0"

# -- General configuration ---------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.viewcode",
    "sphinx.ext.napoleon",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
    "sphinx.ext.todo",
    "autoapi.extension",
]

# AutoAPI parses the sources without importing them
autoapi_type = "python"
autoapi_dirs = ["../src/cfcomm"]
autoapi_root = "autoapi"
autoapi_ignore = ["*/__pycache__/*", "*/test_*.py"]
autoapi_options = [
    "members",
    "undoc-members",
    "show-inheritance",
    "show-module-summary",
    "imported-members",
]
autoapi_python_class_content = "both"
autoapi_member_order = "bysource"
autoapi_add_toctree_entry = False

autodoc_member_order = "bysource"
autodoc_mock_imports = ["numpy", "scipy", "decorator"]

suppress_warnings = ["toc.not_included", "autoapi"]

napoleon_google_docstring = True
napoleon_numpy_docstring = True
napoleon_use_param = True
napoleon_use_rtype = True

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "scipy": ("https://docs.scipy.org/doc/scipy/", None),
}

templates_path = ["_templates"]
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]
master_doc = "index"
language = "en"
pygments_style = "sphinx"
modindex_common_prefix = ["cfcomm."]

# -- Options for HTML output -------------------------------------------------

html_theme = "sphinx_rtd_theme"
html_theme_options = {
    "prev_next_buttons_location": "bottom",
    "collapse_navigation": False,
    "sticky_navigation": True,
    "navigation_depth": 4,
}
html_title = f"{project} v{release}"
html_short_title = project
htmlhelp_basename = "cfcommdoc"

man_pages = [(master_doc, "cfcomm", "cfcomm Documentation", [author], 1)]

todo_include_todos = True
