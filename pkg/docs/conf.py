# Configuration file for the Sphinx documentation builder.
# http://www.sphinx-doc.org/en/master/config

import os, sys, time
sys.path.insert(0, os.path.abspath('..'))

project = 'socdyn'
copyright = str(time.gmtime().tm_year)
author = project
version = ''
release = ''

extensions = [
    'recommonmark',
    'sphinx.ext.autodoc',
    'sphinx.ext.inheritance_diagram',   # Requires running `sudo apt install graphviz`.
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
]
templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'
language = None
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = None

html_theme = ('default', 'alabaster', 'nature')[0]
html_static_path = ['_static']
htmlhelp_basename = 'socdyndoc'

latex_documents = [(master_doc, 'socdyn.tex', 'socdyn Documentation', author, 'manual')]
man_pages = [(master_doc, 'socdyn', 'socdyn Documentation', [author], 1)]

autodoc_default_options = {'show-inheritance': None, 'member-order': 'bysource'}
intersphinx_mapping = {'python': ('https://docs.python.org/3/', None),
                       'numpy': ('https://numpy.org/doc/stable/', None)}
