#!/usr/bin/env python
"""
Stability Lab command-line utility.

Experiments run through the ``stability`` command, e.g.
``python manage.py stability verify --config configs/scalar_offset.json``.
"""
import os
import sys


def main():
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings")
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the pinned stack with "
            "`pip install -r requirements.txt` inside the project venv."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == "__main__":
    main()
