import gzip
import rapidjson
import numpy as np
import pandas as pd
import camix as cx
import camix.input.json as jsonio
import pytest

np.random.seed(0)


def _objects():
    m = cx.MixtureSpec([0.3, 0.7], [cx.UnivariateNormal(-1.0, 0.5), cx.UnivariateNormal(2.0, 1.5)])
    mvn = cx.MixtureSpec([0.5, 0.5], [cx.MultivariateNormal([0.0, 1.0], [[1.0, 0.2], [0.2, 0.5]]),
                                      cx.MultivariateNormal([2.0, 0.0], np.eye(2))])
    data = cx.sample_mixture(m, 40, np.random.default_rng(0))
    data = data.with_plabels(cx.make_context_labels(data.truth, 2, 0.4))
    res = cx.fit('WCA', data, m, silent=True)
    info = cx.info_matrices('WCA', res.spec, data)
    table = pd.DataFrame({'algorithm': ['US', 'CA'], 'ne': [np.nan, 0.5], 'iterations': [3, 4],
                          'converged': [True, False]})
    return m, mvn, data, res, info, table


def test_jsonio(tmp_path):
    m, mvn, data, res, info, table = _objects()
    fname = (tmp_path / 'test_rw').as_posix()
    written = jsonio.dump_to_json([m, mvn, data, res, info, table], fname, description='[tricky description]',
                                  include_trace=True)
    assert written == fname + '.json.gz'
    rm, rmvn, rdata, rres, rinfo, rtable = jsonio.load_json(fname)

    assert np.allclose(rm.to_vector(), m.to_vector())
    assert rmvn.family == 'mvnormal'
    assert np.allclose(rmvn.to_vector(), mvn.to_vector())
    assert np.array_equal(rdata.samples, data.samples)
    assert np.array_equal(rdata.truth, data.truth)
    assert np.allclose(rdata.plabels, data.plabels)
    assert rres.algorithm is cx.Algorithm.WCA
    assert rres.iterations == res.iterations
    assert np.allclose(rres.theta, res.theta)
    assert len(rres.theta_trace) == len(res.theta_trace)
    assert np.allclose(rres.responsibilities, res.responsibilities)
    assert rinfo.param_index == info.param_index
    assert np.allclose(rinfo.i_obs, info.i_obs)
    assert np.isclose(rinfo.r_prime, info.r_prime)
    assert list(rtable.columns) == list(table.columns)
    assert np.isnan(rtable['ne'][0])
    assert list(rtable['converged']) == [True, False]


def test_json_dict_and_plain_file(tmp_path):
    m = _objects()[0]
    fname = (tmp_path / 'plain').as_posix()
    jsonio.dump_to_json(m, fname, gz=False, indent=0)
    with open(fname + '.json') as fin:
        raw = rapidjson.loads(fin.read())
    assert raw['data'][0]['type'] == 'MixtureSpec'
    assert raw['program'].startswith('camix')
    full = jsonio.load_json(fname, gz=False, verbose=False, full_output=True)
    assert full['description'] == ''
    assert isinstance(full['data'], list)
    single = jsonio.load_json(fname + '.json', gz=False, verbose=False)
    assert isinstance(single, cx.MixtureSpec)


def test_json_singular_info():
    with pytest.warns(RuntimeWarning):
        info = cx.mip_assemble(np.ones((2, 2)), np.zeros((2, 2)))
    string = jsonio.create_json_string(info)
    back = jsonio.import_json_string(string, verbose=False)
    assert back.singular
    assert np.isnan(back.r_prime)
    assert np.all(np.isnan(back.rate))


def test_json_errors(tmp_path):
    with pytest.raises(TypeError):
        jsonio.create_json_string([np.zeros(3)])
    with pytest.raises(ValueError):
        jsonio.import_json_string('{"data": [{"type": "Histogram"}]}', verbose=False)
    fname = (tmp_path / 'zipped').as_posix()
    jsonio.dump_to_json(_objects()[0], fname)
    with gzip.open(fname + '.json.gz') as fin:
        assert b'MixtureSpec' in fin.read()
    with pytest.warns(UserWarning):
        with pytest.raises(Exception):
            jsonio.load_json(fname + '.json.gz', gz=False)
