import random

import pytest

from twigjoin.dewey import (
    EPSILON,
    DeweyLabel,
    LabelError,
    child_label,
    compare,
    decode,
    encode,
    encoded_component_len,
    encoded_len,
    format_label,
    is_ancestor_or_self,
    parse_label,
)

# boundaries of the five component length classes
_CLASS_EDGES = [
    (1, 1), (127, 1),
    (128, 2), (16511, 2),
    (16512, 3), (2113663, 3),
    (2113664, 4), (270549119, 4),
    (270549120, 5), (34630287487, 5),
]


def test_child_label_example():
    assert child_label(parse_label("1.3"), 7) == parse_label("1.3.7")


def test_root_is_epsilon():
    assert EPSILON.level == 0
    assert format_label(EPSILON) == "ε"
    assert parse_label("ε") == EPSILON
    assert parse_label("") == EPSILON


def test_label_validation():
    with pytest.raises(LabelError):
        DeweyLabel((0,))
    with pytest.raises(LabelError):
        DeweyLabel((1, -2))
    with pytest.raises(LabelError):
        EPSILON.child(0)
    with pytest.raises(LabelError):
        parse_label("1.x.2")


def test_immutability():
    lab = parse_label("1.2")
    with pytest.raises(AttributeError):
        lab.components = (9,)


def test_prefix_and_ancestor():
    lab = parse_label("1.3.7")
    assert lab.prefix(2) == parse_label("1.3")
    assert lab.prefix(0) == EPSILON
    with pytest.raises(LabelError):
        lab.prefix(4)
    assert is_ancestor_or_self(parse_label("1.3"), lab)
    assert is_ancestor_or_self(lab, lab)
    assert is_ancestor_or_self(EPSILON, lab)
    assert not is_ancestor_or_self(lab, parse_label("1.3"))
    assert not is_ancestor_or_self(parse_label("1.4"), lab)


def test_compare_matches_tuple_order():
    rng = random.Random(1)
    labs = [
        DeweyLabel(tuple(rng.randint(1, 5) for _ in range(rng.randint(0, 4))))
        for _ in range(300)
    ]
    for a in labs[:60]:
        for b in labs[:60]:
            want = (a.components > b.components) - (a.components < b.components)
            assert compare(a, b) == want


def test_format_parse_round_trip():
    rng = random.Random(2)
    for _ in range(200):
        lab = DeweyLabel(tuple(rng.randint(1, 10**6) for _ in range(rng.randint(0, 6))))
        assert parse_label(format_label(lab)) == lab


def test_component_length_classes():
    for value, want in _CLASS_EDGES:
        assert encoded_component_len(value) == want, value
        assert len(encode(DeweyLabel((value,)))) == want


def test_encode_decode_round_trip_boundaries():
    for value, _ in _CLASS_EDGES:
        lab = DeweyLabel((value, 1, value))
        assert decode(encode(lab)) == lab


def test_encode_decode_round_trip_random():
    rng = random.Random(3)
    for _ in range(2000):
        n = rng.randint(0, 8)
        comps = tuple(
            rng.choice((rng.randint(1, 200), rng.randint(1, 10**9)))
            for _ in range(n)
        )
        lab = DeweyLabel(comps)
        data = encode(lab)
        assert decode(data) == lab
        assert len(data) == encoded_len(lab)


def test_encoding_preserves_order():
    rng = random.Random(4)
    labs = [
        DeweyLabel(tuple(
            rng.choice((rng.randint(1, 300), rng.randint(1, 10**7)))
            for _ in range(rng.randint(0, 5))
        ))
        for _ in range(500)
    ]
    encs = [encode(lab) for lab in labs]
    by_label = sorted(range(len(labs)), key=lambda i: labs[i].components)
    by_bytes = sorted(range(len(labs)), key=lambda i: (encs[i], labs[i].components))
    # ties in bytes imply equal labels, so anchor both sorts the same way
    assert [labs[i] for i in by_label] == [labs[i] for i in by_bytes]


def test_component_out_of_range():
    with pytest.raises(LabelError):
        encode(DeweyLabel((34630287488,)))


def test_decode_rejects_bad_lead_byte():
    with pytest.raises(LabelError):
        decode(b"\xf8")
    with pytest.raises(LabelError):
        decode(b"\xff\x00\x00\x00\x00")


def test_decode_rejects_truncation():
    data = encode(parse_label("200"))
    assert len(data) == 2
    with pytest.raises(LabelError):
        decode(data[:1])


def test_decode_rejects_zero_component():
    with pytest.raises(LabelError):
        decode(b"\x00")


def test_every_byte_string_has_one_meaning():
    """Biased classes leave no second encoding for any value."""
    seen = {}
    for value in list(range(1, 300)) + [16510, 16511, 16512, 2113663, 2113664]:
        data = encode(DeweyLabel((value,)))
        assert data not in seen
        seen[data] = value
