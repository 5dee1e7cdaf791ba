r'''
`camix` includes an `input` submodule with the file formats of the package.

# json
`camix.input.json` exports and imports mixture specifications, datasets, fit results, information matrices and result tables as (gzipped) json documents with provenance metadata.

# csv
`camix.input.pandas` writes the result tables of the experiments as csv files with a fixed float format and empty cells for missing values.
'''
from . import json
from . import pandas
