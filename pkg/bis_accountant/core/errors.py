"""
Exception hierarchy for the BIS accountant
The CLI maps AccountingError to exit code 1
"""


class AccountingError(Exception):
    """Base class for failures of an accounting run"""


class NumericalContractError(AccountingError):
    """Non-finite input reached a log-space computation"""


class BracketError(AccountingError):
    """No passing noise multiplier was found below the configured ceiling"""


class EnumerationCapError(AccountingError, ValueError):
    """Brute-force enumeration would exceed the configured subset cap"""
