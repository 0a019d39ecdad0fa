import pytest

from pyrebal.error import OptionError
from pyrebal.optgrammar import *

def test_weights_decimal():
    assert parse_weights("0.2,0.3,0.5") == (0.2, 0.3, 0.5)
    assert parse_weights(" 1, 0, 0 ") == (1.0, 0.0, 0.0)
    assert parse_weights(".5,.25,.25") == (0.5, 0.25, 0.25)

def test_weights_fractions():
    w = parse_weights("1/3,1/3,1/3")
    assert w == pytest.approx((1/3, 1/3, 1/3))
    assert parse_weights("0,1/2,0.5") == (0.0, 0.5, 0.5)

@pytest.mark.parametrize("text", ["1,2", "1,2,3,4", "a,b,c", "1/0,0,0", "", "1;0;0"])
def test_weights_bad(text):
    with pytest.raises(OptionError) as err:
        parse_weights(text)
    print(err.value)

def test_interval():
    assert parse_interval("[1,7]") == (1, 7)
    assert parse_interval("[ 2 , 5 ]") == (2, 5)
    assert parse_interval("3-3") == (3, 3)

@pytest.mark.parametrize("text", ["7-1", "[5,2]", "1", "[1,2", "x-y"])
def test_interval_bad(text):
    with pytest.raises(OptionError):
        parse_interval(text)

def test_int_set():
    assert parse_int_set("17-19,21-23") == frozenset({17, 18, 19, 21, 22, 23})
    assert parse_int_set("20") == frozenset({20})
    assert parse_int_set("3,1,3") == frozenset({1, 3})

def test_int_list():
    assert parse_int_list("14,8,10-12") == (8, 10, 11, 12, 14)

@pytest.mark.parametrize("text", ["5-2", "1,,2", "a", "1-"])
def test_int_set_bad(text):
    with pytest.raises(OptionError):
        parse_int_set(text)
