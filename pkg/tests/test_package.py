import walras


def test_package_info():
    info = walras.get_package_info()
    assert info["version"] == walras.__version__
    assert info["fixtures"] == ["E1", "U1", "X1", "Z0"]
    assert "run_ascending" in info["operations_by_category"]["auction"]


def test_quick_check():
    assert walras.quick_check() == {"E1": True, "U1": True, "X1": True, "Z0": True}
