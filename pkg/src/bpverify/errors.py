"""Exception hierarchy shared by every module."""


class BPVerifyError(Exception):
    """Base class for all errors raised by bpverify."""


class InvalidArgumentError(BPVerifyError, ValueError):
    """Dimensions or parameter ordering are invalid."""


class OutOfDomainError(BPVerifyError, ValueError):
    """A real parameter lies outside the absolutely convergent range."""


class SingularConfigurationError(BPVerifyError, ArithmeticError):
    """Input matrix or point configuration is rank deficient."""


class UnsupportedConfigurationError(BPVerifyError):
    """No evaluation path exists for the requested configuration."""


class UnsupportedOracleError(UnsupportedConfigurationError):
    """A closed form is not available for this test function."""
