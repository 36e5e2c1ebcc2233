"""Basic smoke tests for the package."""

import pytest

import sasr
from sasr.exceptions import ConfigurationError, DimensionError, SasrError, ValidationError


def test_imports():
    """Test that imports work correctly."""
    from sasr import (
        ArtifactError,
        Config,
        ConfigurationError,
        RunConfig,
        SasrError,
        Trainer,
        TrainingError,
        ValidationError,
    )

    assert Trainer is not None
    assert Config is not None
    assert issubclass(ArtifactError, SasrError)
    assert issubclass(TrainingError, SasrError)
    assert RunConfig().shaping.lambda_weight == 0.6


def test_version():
    assert sasr.__version__ == "0.1.0"


def test_error_str_includes_reason():
    error = ValidationError("bandwidth must be positive", reason="got 0")
    assert str(error) == "bandwidth must be positive [Reason: got 0]"
    assert "ValidationError" in repr(error)


def test_error_str_without_reason():
    assert str(SasrError("plain")) == "plain"


def test_dimension_error_is_validation_error():
    with pytest.raises(ValidationError):
        raise DimensionError("shape mismatch")


def test_configuration_error_names_key():
    error = ConfigurationError("Unknown config key 'foo'", key="foo")
    assert error.key == "foo"
    assert "foo" in str(error)
