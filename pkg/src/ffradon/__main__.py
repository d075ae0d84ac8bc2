"""
Main entry point for the ffradon command line.
"""

from ffradon.cli import main as cli


def main() -> None:
    """Main entry point."""
    cli(prog_name="ffradon")


if __name__ == "__main__":
    main()
