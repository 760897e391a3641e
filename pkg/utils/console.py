"""
Colored console helpers and logging setup for the command-line front end

Everything here writes to stderr so that `--out -` keeps stdout machine-readable.
"""
import logging
import sys

from colorama import Fore, Style, init

# Initialize colorama for cross-platform colored output
init(autoreset=True)

TITLE = "Cavity QED Conditional Phase Gate Simulator"


def _emit(text: str):
    print(text, file=sys.stderr)


def print_header():
    """Print simulator header."""
    _emit(f"{Fore.CYAN}{'='*80}")
    _emit(f"{Fore.CYAN}{TITLE:^80}")
    _emit(f"{Fore.CYAN}{'='*80}{Style.RESET_ALL}\n")


def print_section(title: str):
    """Print section header."""
    _emit(f"\n{Fore.YELLOW}{'='*80}")
    _emit(f"{Fore.YELLOW}{title:^80}")
    _emit(f"{Fore.YELLOW}{'='*80}{Style.RESET_ALL}\n")


def print_success(message: str):
    _emit(f"{Fore.GREEN}✓ {message}{Style.RESET_ALL}")


def print_info(message: str):
    _emit(f"{Fore.BLUE}ℹ {message}{Style.RESET_ALL}")


def print_warning(message: str):
    _emit(f"{Fore.YELLOW}⚠ {message}{Style.RESET_ALL}")


def print_error(message: str):
    _emit(f"{Fore.RED}✗ {message}{Style.RESET_ALL}")


class ColorFormatter(logging.Formatter):
    """Log records colored by level."""

    COLORS = {
        logging.DEBUG: Fore.WHITE,
        logging.INFO: Fore.BLUE,
        logging.WARNING: Fore.YELLOW,
        logging.ERROR: Fore.RED,
        logging.CRITICAL: Fore.RED,
    }

    def format(self, record: logging.LogRecord) -> str:
        color = self.COLORS.get(record.levelno, "")
        return f"{color}{super().format(record)}{Style.RESET_ALL}"


def configure_logging(verbose: bool):
    """Install one colored stderr handler on the root logger."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_cavity_gate", False):
            root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(ColorFormatter("%(levelname)s %(name)s: %(message)s"))
    handler._cavity_gate = True  # type: ignore[attr-defined]
    root.addHandler(handler)
    root.setLevel(logging.INFO if verbose else logging.WARNING)
