import rapidjson as json
import gzip
import getpass
import socket
import datetime
import platform
import warnings
import numpy as np
import pandas as pd
from ..mixture import MixtureSpec, LabeledDataset
from ..families import FAMILIES
from ..estimators import Algorithm, FitResult
from ..information import InfoMatrices
from .. import version as camixversion


def create_json_string(ol, description='', indent=1, include_trace=False):
    """Generate the string for the export of a list of mixture objects to a .json(.gz) file.

    Parameters
    ----------
    ol : list
        List of objects that will be exported. Supported are MixtureSpec,
        LabeledDataset, FitResult, InfoMatrices and pandas.DataFrame. A single
        object is wrapped into a list.
    description : str
        Optional string that describes the contents of the json file.
    indent : int
        Specify the indentation level of the json file. None or 0 is permissible and
        saves disk space.
    include_trace : bool
        Export the parameter trace of FitResult objects.

    Returns
    -------
    json_string : str
        String for export to .json(.gz) file
    """

    def write_Spec_to_dict(m):
        return {'type': 'MixtureSpec', 'family': m.family, 'dim': m.dim, 'weights': m.weights.tolist(),
                'components': [c.to_vector().tolist() for c in m.components]}

    def write_Dataset_to_dict(data):
        dd = {'type': 'LabeledDataset', 'samples': data.samples.tolist()}
        if data.truth is not None:
            dd['truth'] = data.truth.tolist()
        if data.plabels is not None:
            dd['plabels'] = data.plabels.tolist()
        return dd

    def write_Fit_to_dict(res):
        dd = {'type': 'FitResult', 'algorithm': res.algorithm.value, 'spec': write_Spec_to_dict(res.spec),
              'converged': res.converged, 'iterations': res.iterations, 'final_loglik': res.final_loglik,
              'responsibilities': np.asarray(res.responsibilities).tolist()}
        if include_trace:
            dd['theta_trace'] = [np.asarray(t).tolist() for t in res.theta_trace]
        return dd

    def write_Info_to_dict(info):
        return {'type': 'InfoMatrices', 'i_c': info.i_c.tolist(), 'i_m': info.i_m.tolist(), 'i_obs': info.i_obs.tolist(),
                'rate': info.rate.tolist(), 'spectral_radius': info.spectral_radius, 'r_prime': info.r_prime,
                'se': info.se.tolist(), 'param_index': list(info.param_index), 'reduced': info.reduced,
                'singular': info.singular}

    def write_Table_to_dict(df):
        return {'type': 'DataFrame', 'columns': [str(c) for c in df.columns],
                'records': [[None if isinstance(v, float) and np.isnan(v) else v for v in row]
                            for row in df.itertuples(index=False, name=None)]}

    if not isinstance(ol, list):
        ol = [ol]

    d = {}
    d['program'] = 'camix %s' % (camixversion.__version__)
    d['version'] = '1.0'
    d['who'] = getpass.getuser()
    d['date'] = datetime.datetime.now().astimezone().strftime('%Y-%m-%d %H:%M:%S %z')
    d['host'] = socket.gethostname() + ', ' + platform.platform()

    if description:
        d['description'] = description

    d['data'] = []
    for io in ol:
        if isinstance(io, MixtureSpec):
            d['data'].append(write_Spec_to_dict(io))
        elif isinstance(io, LabeledDataset):
            d['data'].append(write_Dataset_to_dict(io))
        elif isinstance(io, FitResult):
            d['data'].append(write_Fit_to_dict(io))
        elif isinstance(io, InfoMatrices):
            d['data'].append(write_Info_to_dict(io))
        elif isinstance(io, pd.DataFrame):
            d['data'].append(write_Table_to_dict(io))
        else:
            raise TypeError("Unknown datatype %s." % type(io).__name__)

    def _jsonifier(obj):
        if isinstance(obj, (np.integer, np.bool_)):
            return int(obj) if isinstance(obj, np.integer) else bool(obj)
        elif isinstance(obj, np.floating):
            return None if np.isnan(obj) else float(obj)
        else:
            raise ValueError('%r is not JSON serializable' % (obj,))

    if indent:
        return json.dumps(d, indent=indent, ensure_ascii=False, default=_jsonifier, number_mode=json.NM_NAN,
                          write_mode=json.WM_SINGLE_LINE_ARRAY)
    else:
        return json.dumps(d, indent=indent, ensure_ascii=False, default=_jsonifier, number_mode=json.NM_NAN,
                          write_mode=json.WM_COMPACT)


def dump_to_json(ol, fname, description='', indent=1, gz=True, include_trace=False):
    """Export a list of mixture objects to a .json(.gz) file.

    Parameters
    ----------
    ol : list
        List of objects that will be exported, see `create_json_string`.
    fname : str
        Filename of the output file.
    description : str
        Optional string that describes the contents of the json file.
    indent : int
        Specify the indentation level of the json file. None or 0 is permissible and
        saves disk space.
    gz : bool
        If True, the output is a gzipped json. If False, the output is a json file.
    include_trace : bool
        Export the parameter trace of FitResult objects.

    Returns
    -------
    fname : str
        Name of the written file including the appended suffixes.
    """

    jsonstring = create_json_string(ol, description, indent, include_trace)

    if not fname.endswith('.json') and not fname.endswith('.gz'):
        fname += '.json'

    if gz:
        if not fname.endswith('.gz'):
            fname += '.gz'
        with gzip.open(fname, 'wb') as fp:
            fp.write(jsonstring.encode('utf-8'))
    else:
        with open(fname, 'w', encoding='utf-8') as fp:
            fp.write(jsonstring)
    return fname


def _parse_json_dict(json_dict, verbose=True, full_output=False):
    """Reconstruct a list of mixture objects from a dict that was built out of a json string.

    If the list contains only one element, it is unpacked from the list.
    """

    def _nan(v):
        return np.nan if v is None else v

    def get_Spec_from_dict(o):
        cls = FAMILIES[o['family']]
        return MixtureSpec(o['weights'], [cls.from_vector(np.array(v, dtype=float), o['dim']) for v in o['components']])

    def get_Dataset_from_dict(o):
        return LabeledDataset(np.array(o['samples'], dtype=float), o.get('truth'), o.get('plabels'))

    def get_Fit_from_dict(o):
        spec = get_Spec_from_dict(o['spec'])
        trace = [np.array(t, dtype=float) for t in o.get('theta_trace', [])]
        return FitResult(Algorithm.parse(o['algorithm']), spec, trace, o['converged'], o['iterations'],
                         _nan(o['final_loglik']), np.array(o['responsibilities'], dtype=float))

    def get_Info_from_dict(o):
        n = len(o['i_c'])

        def arr(key):
            return np.array([[_nan(v) for v in row] for row in o[key]], dtype=float).reshape(n, n)
        return InfoMatrices(arr('i_c'), arr('i_m'), arr('i_obs'), arr('rate'), _nan(o['spectral_radius']),
                            _nan(o['r_prime']), np.array([_nan(v) for v in o['se']], dtype=float),
                            tuple(o['param_index']), o['reduced'], o['singular'])

    def get_Table_from_dict(o):
        return pd.DataFrame([[np.nan if v is None else v for v in row] for row in o['records']], columns=o['columns'])

    parsers = {'MixtureSpec': get_Spec_from_dict, 'LabeledDataset': get_Dataset_from_dict, 'FitResult': get_Fit_from_dict,
               'InfoMatrices': get_Info_from_dict, 'DataFrame': get_Table_from_dict}

    prog = json_dict.get('program', '')
    version = json_dict.get('version', '')
    who = json_dict.get('who', '')
    date = json_dict.get('date', '')
    host = json_dict.get('host', '')
    if prog and verbose:
        print('Data has been written using %s.' % (prog))
    if version and verbose:
        print('Format version %s' % (version))
    if (who or date or host) and verbose:
        print('Written by %s on %s on host %s' % (who, date, host))
    description = json_dict.get('description', '')
    if description and verbose:
        print()
        print('Description: ', description)

    ol = []
    for io in json_dict['data']:
        try:
            ol.append(parsers[io['type']](io))
        except KeyError:
            raise ValueError("Unknown datatype %s." % io.get('type')) from None

    if full_output:
        retd = {}
        retd['program'] = prog
        retd['version'] = version
        retd['who'] = who
        retd['date'] = date
        retd['host'] = host
        retd['description'] = description
        retd['data'] = ol
        return retd
    else:
        if len(ol) == 1:
            return ol[0]
        return ol


def import_json_string(json_string, verbose=True, full_output=False):
    """Reconstruct a list of mixture objects from a json string.

    Parameters
    ----------
    json_string : str
        json string containing the data.
    verbose : bool
        Print additional information that was written to the file.
    full_output : bool
        If True, a dict containing auxiliary information and the data is returned.
        If False, only the data is returned.

    Returns
    -------
    result : list
        reconstructed objects, a single object if the list only has one entry
        or a dict if full_output=True
    """
    return _parse_json_dict(json.loads(json_string, number_mode=json.NM_NAN), verbose, full_output)


def load_json(fname, verbose=True, gz=True, full_output=False):
    """Import a list of mixture objects from a .json(.gz) file.

    Parameters
    ----------
    fname : str
        Filename of the input file.
    verbose : bool
        Print additional information that was written to the file.
    gz : bool
        If True, assumes that data is gzipped. If False, assumes JSON file.
    full_output : bool
        If True, a dict containing auxiliary information and the data is returned.
        If False, only the data is returned.
    """
    if not fname.endswith('.json') and not fname.endswith('.gz'):
        fname += '.json'
    if gz:
        if not fname.endswith('.gz'):
            fname += '.gz'
        with gzip.open(fname, 'r') as fin:
            d = json.loads(fin.read().decode('utf-8'), number_mode=json.NM_NAN)
    else:
        if fname.endswith('.gz'):
            warnings.warn("Trying to read from %s without unzipping!" % fname, UserWarning)
        with open(fname, 'r', encoding='utf-8') as fin:
            d = json.loads(fin.read(), number_mode=json.NM_NAN)

    return _parse_json_dict(d, verbose, full_output)
