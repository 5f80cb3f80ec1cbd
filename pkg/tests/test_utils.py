import logging
import os
import stat
import threading
import unittest

import portalocker
import pytest

from soliton_surfaces.errors import ConfigError, ExportError, MappingUndefinedError
from soliton_surfaces.utils.app_logger import get_logger, set_level
from soliton_surfaces.utils.atomic_write import atomic_write
from soliton_surfaces.utils.error_handler import cli_errors, exit_code_for, handle_exception, safe_call
from soliton_surfaces.utils.file_lock import export_lock, write_with_lock
from soliton_surfaces.utils.validation import (
    is_finite_number,
    is_integer,
    is_number,
    parse_coefficients,
    parse_complex,
)


class TestValidation(unittest.TestCase):
    def test_is_number(self):
        self.assertTrue(is_number("3.14"))
        self.assertTrue(is_number("12"))
        self.assertFalse(is_number("abc"))
        self.assertFalse(is_number(None))

    def test_is_finite_number(self):
        self.assertTrue(is_finite_number("1e-8"))
        self.assertFalse(is_finite_number("nan"))
        self.assertFalse(is_finite_number(float("inf")))
        self.assertFalse(is_finite_number(True))

    def test_is_integer(self):
        self.assertTrue(is_integer("10"))
        self.assertTrue(is_integer(5))
        self.assertFalse(is_integer("5.7"))
        self.assertFalse(is_integer(False))

    def test_parse_complex(self):
        self.assertEqual(parse_complex("1+1i"), 1 + 1j)
        self.assertEqual(parse_complex("-2.5i"), -2.5j)
        self.assertEqual(parse_complex("i"), 1j)
        self.assertEqual(parse_complex("1-i"), 1 - 1j)
        self.assertEqual(parse_complex(" 3 "), 3)
        self.assertEqual(parse_complex("2j"), 2j)
        for bad in ("", "abc", "1+1k", "nan", "inf+1i"):
            with self.assertRaises(ValueError):
                parse_complex(bad)

    def test_parse_coefficients(self):
        self.assertEqual(parse_coefficients("0,1.5,2i"), [0, 1.5, 2j])
        with self.assertRaises(ValueError):
            parse_coefficients("1,,2")


def test_exit_codes():
    assert exit_code_for(ConfigError("bad", "--k")) == 2
    assert exit_code_for(MappingUndefinedError(0.0, (0.0, 0.0, 1.0))) == 3
    assert exit_code_for(ExportError("disk full")) == 4
    assert exit_code_for(PermissionError("denied")) == 4
    assert exit_code_for(ZeroDivisionError()) == 3


def test_handle_exception_is_one_line():
    message = handle_exception(ValueError("first\nsecond"), "loading failed")
    assert message == "loading failed: first second"
    assert handle_exception(RuntimeError(), "oops") == "oops"


def test_cli_errors(capsys):
    @cli_errors("command failed")
    def command(fail):
        if fail:
            raise ConfigError("--k 5 is out of range", "--k")
        return 0

    assert command(False) == 0
    assert command(True) == 2
    assert capsys.readouterr().err.startswith("command failed: --k 5 is out of range")


def test_safe_call():
    assert safe_call(lambda a, b: a + b, 1, 2) == 3
    assert safe_call(lambda: 1 / 0, user_msg="division") is None


def test_logger_levels():
    logger = get_logger("tests.levels", log_level="ERROR")
    assert logger.name == "soliton_surfaces.tests.levels"
    assert logger.level == logging.ERROR
    assert get_logger("tests.levels") is logger
    set_level("DEBUG")
    assert logger.level == logging.DEBUG
    set_level("WARNING")
    assert logger.level == logging.WARNING


def test_atomic_write(tmp_path):
    target = tmp_path / "sub" / "data.txt"
    atomic_write(target, "première ligne\n")
    assert target.read_text(encoding="utf-8") == "première ligne\n"
    atomic_write(target, b"\x00\x01")
    assert target.read_bytes() == b"\x00\x01"
    assert [p.name for p in target.parent.iterdir()] == ["data.txt"]


def test_atomic_write_streams_chunks_and_keeps_mode(tmp_path):
    target = tmp_path / "mesh.obj"
    target.write_bytes(b"old")
    os.chmod(target, 0o640)
    n = atomic_write(target, (f"v {i} 0 0\n".encode() for i in range(3)))
    assert n == len(target.read_bytes())
    assert target.read_text().splitlines() == ["v 0 0 0", "v 1 0 0", "v 2 0 0"]
    assert stat.S_IMODE(target.stat().st_mode) == 0o640


def test_atomic_write_failure_leaves_target(tmp_path):
    target = tmp_path / "mesh.obj"
    target.write_bytes(b"kept")

    def broken():
        yield b"partial"
        raise RuntimeError("interrompu")

    with pytest.raises(RuntimeError):
        atomic_write(target, broken())
    assert target.read_bytes() == b"kept"
    assert [p.name for p in tmp_path.iterdir()] == ["mesh.obj"]


def test_write_with_lock_concurrent(tmp_path):
    target = tmp_path / "mesh.obj"
    payloads = [f"v {i} {i} {i}\n".encode() * 50 for i in range(8)]
    threads = [threading.Thread(target=write_with_lock, args=(target, p)) for p in payloads]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert target.read_bytes() in payloads


def test_export_lock_timeout(tmp_path):
    target = tmp_path / "report.json"
    with export_lock(target):
        with pytest.raises(portalocker.exceptions.LockException):
            with export_lock(target, timeout=0.1):
                pass
