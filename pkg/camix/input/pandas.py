import warnings
import gzip
import pandas as pd

FLOAT_FORMAT = '%.10g'
OPTIONAL_COLUMNS = ('ne', 'ASE', 'r_prime', 'acc', 'ba', 'mse', 'bias_b', 'p_value',
                    'se_pi1', 'se_mu1', 'se_mu2', 'se_sum', 'running_ba', 'mean_running_ba', 'mean_ne')


def dump_df(df, fname, gz=False, optional=OPTIONAL_COLUMNS):
    """Exports a pandas DataFrame to a (gzipped) csv file.

    Floats are written with a fixed format and NaN cells are left empty.

    Parameters
    ----------
    df : pandas.DataFrame
        Dataframe to be dumped to a file.
    fname : str
        Filename of the output file.
    gz : bool
        If True, the output is a gzipped csv file. If False, the output is a csv file.
    optional : sequence of str
        Columns in which empty cells are expected. NaN values in any other
        column trigger a warning.

    Returns
    -------
    fname : str
        Name of the written file including the appended suffixes.
    """
    for column in df:
        if column in optional:
            continue
        if pd.api.types.is_numeric_dtype(df[column]) and df[column].isna().any():
            warnings.warn("nan value in column " + str(column) + " will be written as an empty cell", UserWarning)

    if not fname.endswith('.csv') and not fname.endswith('.gz'):
        fname += '.csv'

    if gz is True:
        if not fname.endswith('.gz'):
            fname += '.gz'
        df.to_csv(fname, index=False, float_format=FLOAT_FORMAT, lineterminator='\n', compression='gzip')
    else:
        df.to_csv(fname, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return fname


def load_df(fname, gz=False):
    """Imports a pandas DataFrame from a csv.(gz) file written by `dump_df`.

    Parameters
    ----------
    fname : str
        Filename of the input file.
    gz : bool
        If True, assumes that data is gzipped. If False, assumes csv file.

    Returns
    -------
    data : pandas.DataFrame
        Dataframe with the content of the file, empty cells as NaN.
    """
    if not fname.endswith('.csv') and not fname.endswith('.gz'):
        fname += '.csv'

    if gz is True:
        if not fname.endswith('.gz'):
            fname += '.gz'
        with gzip.open(fname) as f:
            return pd.read_csv(f)
    if fname.endswith('.gz'):
        warnings.warn("Trying to read from %s without unzipping!" % fname, UserWarning)
    return pd.read_csv(fname)


def _sibling(fname, suffix):
    base = fname[:-len('.csv')] if fname.endswith('.csv') else fname
    return base + suffix


def dump_report(report, fname, gz=False):
    """Writes the rows, aggregates and significance tables of a scenario report.

    The rows go to `fname` (.csv appended if missing), the other two tables to
    sibling files with the suffixes .agg.csv and .sig.csv.

    Returns
    -------
    fnames : list of str
        The three written files.
    """
    out = [dump_df(report.rows, _sibling(fname, '.csv'), gz=gz)]
    out.append(dump_df(report.aggregates, _sibling(fname, '.agg.csv'), gz=gz, optional=report.aggregates.columns))
    out.append(dump_df(report.significance, _sibling(fname, '.sig.csv'), gz=gz))
    return out


def dump_table(df, fname, fmt='csv', gz=False, description=''):
    """Writes a result table as csv or as a camix json document."""
    if fmt == 'csv':
        return dump_df(df, fname, gz=gz, optional=df.columns)
    if fmt == 'json':
        from .json import dump_to_json
        return dump_to_json([df], fname, description=description, gz=gz)
    raise ValueError(f"Unknown format '{fmt}', use csv or json.")
