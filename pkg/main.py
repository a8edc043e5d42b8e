#!/usr/bin/env python3
"""
graphdecomp entry point

Runs one command-line invocation; logs go to standard error so standard
output stays a single JSON document.
"""

import logging
import sys

import cli
import config

log_level = config.load_config()['LOG_LEVEL']
logging.basicConfig(
    level=getattr(logging, log_level, logging.INFO),
    format='%(asctime)s [%(levelname)s] %(name)s: %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S',
    stream=sys.stderr,
)


def main() -> None:
    """Main entry point"""
    sys.exit(cli.main())


if __name__ == '__main__':
    main()
