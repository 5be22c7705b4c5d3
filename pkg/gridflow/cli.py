"""``gridflow`` console entry point.

Subcommands are Django management commands living in the ``ppf`` app; this
wrapper only selects the settings module and accepts hyphenated names.
"""
import os
import sys

COMMAND_ALIASES = {
    'gen-data': 'gen_data',
}


def main(argv=None):
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'gridflow.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable?"
        ) from exc

    argv = list(sys.argv if argv is None else argv)
    if len(argv) > 1:
        argv[1] = COMMAND_ALIASES.get(argv[1], argv[1])
    execute_from_command_line(['gridflow', *argv[1:]])


if __name__ == '__main__':
    main()
