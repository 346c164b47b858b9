import logging

import numpy as np
import pytest

from labelmap.config import ExitCode
from labelmap.export.results_writer import read_embedding, read_trace, write_embedding
from labelmap.main import build_parser, cli_main
from labelmap.mapping.geometry import Embedding
from labelmap.mapping.metrics import MapQualityReport

FAST = ['--epochs', '15']


def _map(feature_csv, out, *extra):
    return cli_main(['map', '--input', str(feature_csv), '--out-coords', str(out)] + FAST + list(extra))


def _grid_features(tmp_path, n=20):
    """Feature CSV whose values survive the coordinates file exactly."""
    rng = np.random.default_rng(11)
    points = np.round(rng.uniform(1.0, 10.0, size=(n, 2)), 6)
    labels = ['p' if i % 2 else 'q' for i in range(n)]
    path = tmp_path / 'grid.csv'
    path.write_text('x,y,label\n' + ''.join(
        f"{x:.6f},{y:.6f},{label}\n" for (x, y), label in zip(points, labels)))
    return path, points, labels


def test_parser_defaults():
    args = build_parser().parse_args(['map', '--input', 'a.csv', '--out-coords', 'b.csv'])
    assert args.method == 'classimap'
    assert args.label_col == 'label'
    assert args.init == 'mds'
    assert args.verbose is False


def test_map_is_reproducible(tmp_path, feature_csv):
    first, second = tmp_path / 'a.csv', tmp_path / 'b.csv'
    assert _map(feature_csv, first, '--seed', '7', '--out-trace', str(tmp_path / 'a.tsv')) == ExitCode.OK
    assert _map(feature_csv, second, '--seed', '7', '--out-trace', str(tmp_path / 'b.tsv')) == ExitCode.OK
    assert first.read_bytes() == second.read_bytes()
    assert (tmp_path / 'a.tsv').read_bytes() == (tmp_path / 'b.tsv').read_bytes()

    e, labels = read_embedding(first)
    assert e.n == 20
    assert labels.labels == ('a',) * 10 + ('b',) * 10
    trace = read_trace(tmp_path / 'a.tsv')
    assert len(trace.records) == 15
    assert -1 <= trace.best_epoch < 15


def test_map_parallel_is_reproducible(tmp_path, feature_csv):
    one, two = tmp_path / 'one.csv', tmp_path / 'two.csv'
    assert _map(feature_csv, one, '--workers', '3') == ExitCode.OK
    assert _map(feature_csv, two, '--workers', '3') == ExitCode.OK
    assert one.read_bytes() == two.read_bytes()


@pytest.mark.parametrize('method', ['classimap', 'sammon', 'cca'])
def test_map_methods(tmp_path, feature_csv, method):
    out = tmp_path / 'map.csv'
    assert _map(feature_csv, out, '--method', method, '--normalize', 'mean') == ExitCode.OK
    e, _ = read_embedding(out)
    assert np.all(np.isfinite(e.y))


def test_map_rejects_bad_lambda(tmp_path, feature_csv, capsys):
    code = _map(feature_csv, tmp_path / 'map.csv', '--lambda-start', '1.5')
    assert code == ExitCode.USAGE
    assert 'lambda_start' in capsys.readouterr().err
    assert not (tmp_path / 'map.csv').exists()


def test_bad_lambda_wins_over_missing_input(tmp_path):
    code = cli_main(['map', '--input', str(tmp_path / 'missing.csv'),
                     '--out-coords', str(tmp_path / 'map.csv'), '--lambda-end', '-0.1'])
    assert code == ExitCode.USAGE


@pytest.mark.parametrize('argv', [
    ['map', '--input', 'a.csv'],
    ['nonsense'],
    [],
    ['map', '--input', 'a.csv', '--out-coords', 'b.csv', '--method', 'tsne'],
])
def test_usage_errors(argv, capsys):
    assert cli_main(argv) == ExitCode.USAGE
    assert 'labelmap: error:' in capsys.readouterr().err


def test_help_exits_cleanly(capsys):
    assert cli_main(['--help']) == ExitCode.OK
    assert 'map' in capsys.readouterr().out


def test_missing_input_file(tmp_path):
    code = _map(tmp_path / 'missing.csv', tmp_path / 'map.csv')
    assert code == ExitCode.DATA


def test_malformed_input(tmp_path):
    bad = tmp_path / 'bad.csv'
    bad.write_text('x,y,label\n0,0,a\n1,oops,b\n')
    assert _map(bad, tmp_path / 'map.csv') == ExitCode.DATA


def test_ragged_input_message_is_one_line(tmp_path, capsys):
    bad = tmp_path / 'ragged.csv'
    bad.write_text('x,y,label\n0,0,a\n1,2,b,extra\n')
    assert _map(bad, tmp_path / 'map.csv') == ExitCode.DATA
    err = capsys.readouterr().err
    assert err.startswith('labelmap: error: Cannot parse')
    assert '\n\n' not in err


def test_matrix_not_utf8(tmp_path, capsys):
    matrix = tmp_path / 'd.csv'
    matrix.write_bytes(b'0,1\n1,0\xff\n')
    labels = tmp_path / 'labels.txt'
    labels.write_text('a\nb\n')
    code = cli_main(['map', '--input', str(matrix), '--labels', str(labels),
                     '--out-coords', str(tmp_path / 'map.csv')])
    assert code == ExitCode.DATA
    assert 'labelmap: error:' in capsys.readouterr().err


def test_labels_not_utf8(tmp_path, capsys):
    matrix = tmp_path / 'd.csv'
    matrix.write_text('0,1\n1,0\n')
    labels = tmp_path / 'labels.txt'
    labels.write_bytes(b'a\n\xffb\n')
    code = cli_main(['map', '--input', str(matrix), '--labels', str(labels),
                     '--out-coords', str(tmp_path / 'map.csv')])
    assert code == ExitCode.DATA
    assert 'labelmap: error:' in capsys.readouterr().err


def test_plot_coordinates_not_utf8(tmp_path, capsys):
    coords = tmp_path / 'coords.csv'
    coords.write_bytes(b'index,x,y,label\n0,0.0,0.0,\xff\n')
    code = cli_main(['plot', '--coords', str(coords), '--out-svg', str(tmp_path / 'x.svg')])
    assert code == ExitCode.DATA
    assert 'labelmap: error:' in capsys.readouterr().err
    assert not (tmp_path / 'x.svg').exists()


def test_distance_matrix_input(tmp_path):
    matrix = tmp_path / 'd.txt'
    matrix.write_text('0 1 2 2\n1 0 1 2\n2 1 0 1\n2 2 1 0\n')
    labels = tmp_path / 'labels.txt'
    labels.write_text('a\na\nb\nb\n')
    out = tmp_path / 'map.csv'
    code = cli_main(['map', '--input', str(matrix), '--labels', str(labels),
                     '--out-coords', str(out)] + FAST)
    assert code == ExitCode.OK
    e, read_labels = read_embedding(out)
    assert e.n == 4
    assert read_labels.labels == ('a', 'a', 'b', 'b')


def test_non_euclidean_matrix_maps(tmp_path):
    matrix = tmp_path / 'd.csv'
    matrix.write_text('0,1,10\n1,0,1\n10,1,0\n')
    labels = tmp_path / 'labels.txt'
    labels.write_text('a\nb\nc\n')
    out = tmp_path / 'map.csv'
    code = cli_main(['map', '--input', str(matrix), '--labels', str(labels),
                     '--out-coords', str(out)] + FAST)
    assert code == ExitCode.OK
    assert np.all(np.isfinite(read_embedding(out)[0].y))


def test_label_count_mismatch(tmp_path):
    matrix = tmp_path / 'd.csv'
    matrix.write_text('0,1\n1,0\n')
    labels = tmp_path / 'labels.txt'
    labels.write_text('a\nb\nc\n')
    code = cli_main(['map', '--input', str(matrix), '--labels', str(labels),
                     '--out-coords', str(tmp_path / 'map.csv')])
    assert code == ExitCode.DATA


def test_eval_identity_map(tmp_path):
    features, points, labels = _grid_features(tmp_path)
    coords = tmp_path / 'coords.csv'
    write_embedding(Embedding(points), labels, coords)
    report_path = tmp_path / 'report.txt'
    code = cli_main(['eval', '--input', str(features), '--coords', str(coords),
                     '--out-report', str(report_path)])
    assert code == ExitCode.OK

    report = MapQualityReport.from_text(report_path.read_text())
    assert report.k == 9
    assert report.trustworthiness == 1.0
    assert report.continuity == 1.0
    assert (report.fn_within, report.fn_between, report.tear_within, report.tear_between) == (0, 0, 0, 0)


def test_eval_to_stdout_csv(tmp_path, capsys):
    features, points, labels = _grid_features(tmp_path)
    coords = tmp_path / 'coords.csv'
    write_embedding(Embedding(points), labels, coords)
    code = cli_main(['eval', '--input', str(features), '--coords', str(coords),
                     '--k', '3', '--format', 'csv'])
    assert code == ExitCode.OK
    header, row = capsys.readouterr().out.splitlines()
    assert header.startswith('k,trustworthiness,')
    assert row.startswith('3,1.000000000000,1.000000000000,')


def test_eval_rejects_large_k(tmp_path):
    features, points, labels = _grid_features(tmp_path)
    coords = tmp_path / 'coords.csv'
    write_embedding(Embedding(points), labels, coords)
    code = cli_main(['eval', '--input', str(features), '--coords', str(coords), '--k', '10'])
    assert code == ExitCode.USAGE


def test_eval_warns_on_label_mismatch(tmp_path, caplog):
    features, points, labels = _grid_features(tmp_path)
    coords = tmp_path / 'coords.csv'
    write_embedding(Embedding(points), ['z'] * len(labels), coords)
    with caplog.at_level(logging.WARNING, logger='labelmap'):
        code = cli_main(['eval', '--input', str(features), '--coords', str(coords),
                         '--out-report', str(tmp_path / 'r.txt')])
    assert code == ExitCode.OK
    assert 'differ from the input labels' in caplog.text


def test_eval_size_mismatch(tmp_path):
    features, points, labels = _grid_features(tmp_path)
    coords = tmp_path / 'coords.csv'
    write_embedding(Embedding(points[:5]), labels[:5], coords)
    code = cli_main(['eval', '--input', str(features), '--coords', str(coords)])
    assert code == ExitCode.DATA


def test_map_eval_plot_pipeline(tmp_path, feature_csv):
    coords = tmp_path / 'map.csv'
    assert _map(feature_csv, coords, '--seed', '3') == ExitCode.OK

    reports = []
    for name in ('r1.txt', 'r2.txt'):
        assert cli_main(['eval', '--input', str(feature_csv), '--coords', str(coords),
                         '--out-report', str(tmp_path / name)]) == ExitCode.OK
        reports.append((tmp_path / name).read_text())
    assert reports[0] == reports[1]
    report = MapQualityReport.from_text(reports[0])
    assert 0.0 <= report.trustworthiness <= 1.0
    assert report.knn_accuracy == 1.0

    svgs = []
    for name in ('a.svg', 'b.svg'):
        assert cli_main(['plot', '--coords', str(coords), '--out-svg', str(tmp_path / name),
                         '--width', '300', '--height', '200']) == ExitCode.OK
        svgs.append((tmp_path / name).read_text())
    assert svgs[0] == svgs[1]
    assert svgs[0].startswith('<?xml')
    assert 'width="300" height="200"' in svgs[0]


def test_plot_rejects_bad_size(tmp_path):
    coords = tmp_path / 'coords.csv'
    write_embedding(Embedding([[0.0, 0.0], [1.0, 1.0]]), ['a', 'b'], coords)
    code = cli_main(['plot', '--coords', str(coords), '--out-svg', str(tmp_path / 'x.svg'),
                     '--width', '0'])
    assert code == ExitCode.USAGE


def test_synth_then_map(tmp_path):
    data = tmp_path / 'plane.csv'
    assert cli_main(['synth', '--kind', 'plane', '--n', '30', '--seed', '2',
                     '--out', str(data)]) == ExitCode.OK
    lines = data.read_text().splitlines()
    assert lines[0] == 'f0,f1,f2,f3,f4,f5,f6,f7,label'
    assert len(lines) == 31

    gaussians = tmp_path / 'g.csv'
    assert cli_main(['synth', '--kind', 'gaussians', '--n', '40', '--dim', '3',
                     '--out', str(gaussians)]) == ExitCode.OK
    assert gaussians.read_text().splitlines()[0] == 'f0,f1,f2,label'
    assert _map(gaussians, tmp_path / 'map.csv') == ExitCode.OK


def test_compare_writes_one_row_per_method(tmp_path, feature_csv):
    out = tmp_path / 'compare.csv'
    code = cli_main(['compare', '--input', str(feature_csv), '--out', str(out),
                     '--epochs', '5', '--k', '4'])
    assert code == ExitCode.OK
    lines = out.read_text().splitlines()
    assert lines[0].startswith('method,k,trustworthiness')
    assert [line.split(',')[0] for line in lines[1:]] == ['classimap', 'sammon', 'cca']
    assert all(line.split(',')[1] == '4' for line in lines[1:])
