import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from softround.imgcore import (
    FormatError,
    ValueSet,
    check_image,
    encode_pgm,
    format_kernel_text,
    load_kernel,
    load_pgm,
    normalize_kernel,
    parse_kernel_text,
    parse_pgm,
    quantize,
    save_kernel,
    save_pgm,
    value_set_from_bytes,
)


def test_parse_endpoints():
    img = parse_pgm(b"P5\n2 1\n255\n" + bytes([0, 255]))
    assert img.shape == (1, 2)
    assert img.tolist() == [[0.0, 1.0]]


def test_parse_single_pixel():
    assert parse_pgm(b"P5 1 1 255\n" + bytes([128]))[0, 0] == 128 / 255


def test_parse_comments_in_header():
    data = b"P5\n# made by hand\n2 # width then height\n1\n255\n" + bytes([3, 4])
    assert (parse_pgm(data) * 255).round().tolist() == [[3, 4]]


def test_truncated_payload_reports_offset():
    data = b"P5\n2 2\n255\n" + bytes([1, 2, 3])
    with pytest.raises(FormatError, match="truncated") as info:
        parse_pgm(data)
    assert info.value.offset == len(data)


@pytest.mark.parametrize(
    "data",
    [b"P2\n1 1\n255\n1", b"P5\n1 1\n65535\n\x00\x00", b"P5\nx 1\n255\n\x00", b"P5\n1 1", b"P5\n0 1\n255\n"],
)
def test_bad_headers(data):
    with pytest.raises(FormatError):
        parse_pgm(data)


def test_quantize_examples():
    assert quantize(np.array([[0.0, 1.0]])).tolist() == [[0, 255]]
    assert quantize(np.array([[0.5]]))[0, 0] == 128
    assert quantize(np.array([[-0.2, 1.7]])).tolist() == [[0, 255]]


def test_encode_layout():
    data = encode_pgm(np.array([[0.0, 1.0, 0.5]]))
    assert data == b"P5\n3 1\n255\n" + bytes([0, 255, 128])


@given(arrays(np.uint8, st.tuples(st.integers(1, 9), st.integers(1, 9))))
def test_pgm_round_trip_exact(levels):
    img = levels.astype(np.float64) / 255.0
    assert np.array_equal(parse_pgm(encode_pgm(img)), img)


def test_pgm_file_round_trip(tmp_path):
    img = np.arange(12, dtype=np.float64).reshape(3, 4) * 20 / 255
    save_pgm(img, tmp_path / "a.pgm")
    assert np.array_equal(load_pgm(tmp_path / "a.pgm"), img)


def test_value_set_examples():
    assert value_set_from_bytes([217, 26]).values == (26 / 255, 217 / 255)
    assert value_set_from_bytes([0, 100, 150, 255]).values == (0.0, 100 / 255, 150 / 255, 1.0)
    assert value_set_from_bytes([50, 50]).values == (50 / 255,)


@given(st.lists(st.integers(0, 255), min_size=1, max_size=30))
def test_value_set_from_bytes_invariants(levels):
    vs = value_set_from_bytes(levels)
    v = vs.as_array()
    assert np.all(np.diff(v) > 0)
    assert v.min() >= 0 and v.max() <= 1
    assert vs.to_bytes() == sorted(set(levels))


@pytest.mark.parametrize("bad", [(), (0.5, 0.5), (0.6, 0.2), (-0.1,), (1.2,)])
def test_value_set_rejects(bad):
    with pytest.raises(ValueError):
        ValueSet(bad)


@pytest.mark.parametrize("bad", [[], [256], [-1], [1.5]])
def test_value_set_from_bytes_rejects(bad):
    with pytest.raises(ValueError):
        value_set_from_bytes(bad)


def test_check_image_rejects():
    with pytest.raises(ValueError):
        check_image(np.zeros(3))
    with pytest.raises(ValueError):
        check_image(np.array([[np.nan]]))


def test_normalize_kernel():
    k = normalize_kernel([[1, 2, 1]])
    assert k.shape == (1, 3) and np.isclose(k.sum(), 1)
    for bad in ([[1, 1]], [[-1, 2, 1]], [[0, 0, 0]]):
        with pytest.raises(ValueError):
            normalize_kernel(bad)


def test_kernel_text_round_trip(tmp_path):
    k = normalize_kernel(np.random.default_rng(0).random((3, 5)))
    save_kernel(k, tmp_path / "k.txt")
    assert np.array_equal(load_kernel(tmp_path / "k.txt"), k / k.sum())
    assert format_kernel_text(k).splitlines()[0] == "5 3"


def test_kernel_text_errors():
    with pytest.raises(FormatError):
        parse_kernel_text("")
    with pytest.raises(FormatError):
        parse_kernel_text("3 1\n1 2")
    with pytest.raises(FormatError):
        parse_kernel_text("1 1\nabc")
