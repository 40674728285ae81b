# tests/test_sanity.py

def test_pytest_is_working():
    assert 1 + 1 == 2
