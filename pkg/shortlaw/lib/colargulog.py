import logging
import re

from termcolor import colored

"""
Log formatters accepting brace-style arguments: logger.info("checked {} pairs on {}", n, spec).
The colorized variant highlights the level name and every argument.
"""

LEVEL_COLORS = {
    logging.DEBUG: ('white', []),
    logging.INFO: ('green', ['bold']),
    logging.WARNING: ('yellow', []),
    logging.ERROR: ('red', []),
    logging.CRITICAL: ('red', ['bold']),
}
ARG_COLORS = ['magenta', 'cyan']
LEVEL_FIELDS = ["levelname", "levelno"]


def is_brace_format_style(record: logging.LogRecord) -> bool:
    if not record.args or not isinstance(record.msg, str):
        return False

    msg = record.msg
    if '%' in msg:
        return False

    count_of_start_param = msg.count("{")
    if count_of_start_param != msg.count("}"):
        return False

    return count_of_start_param == len(record.args)


class BraceFormatStyleFormatter(logging.Formatter):
    def __init__(self, fmt: str):
        super().__init__()
        self.formatter = logging.Formatter(fmt)

    @staticmethod
    def rewrite_record(record: logging.LogRecord):
        if not is_brace_format_style(record):
            return

        record.msg = record.msg.format(*record.args)
        record.args = ()

    def format(self, record):
        orig_msg = record.msg
        orig_args = record.args
        self.rewrite_record(record)
        formatted = self.formatter.format(record)

        # restore log record to original state for other handlers
        record.msg = orig_msg
        record.args = orig_args
        return formatted


class ColorizedArgsFormatter(BraceFormatStyleFormatter):
    def __init__(self, fmt: str):
        super().__init__(fmt)
        self.level_to_formatter = {}

        for level, (color, attrs) in LEVEL_COLORS.items():
            _format = fmt
            for fld in LEVEL_FIELDS:
                search = r"(%\(" + fld + r"\).*?s)"
                _format = re.sub(search, lambda m: colored(m.group(1), color, attrs=attrs), _format)
            self.level_to_formatter[level] = logging.Formatter(_format)

    @staticmethod
    def rewrite_record(record: logging.LogRecord):
        if not is_brace_format_style(record):
            return

        pieces = re.split(r"\{[^{}]*\}", record.msg)
        msg = pieces[0]
        for i, (arg, piece) in enumerate(zip(record.args, pieces[1:])):
            msg += colored(str(arg), ARG_COLORS[i % len(ARG_COLORS)], attrs=['bold']) + piece

        record.msg = msg
        record.args = ()

    def format(self, record):
        orig_msg = record.msg
        orig_args = record.args
        formatter = self.level_to_formatter.get(record.levelno, self.formatter)
        self.rewrite_record(record)
        formatted = formatter.format(record)
        record.msg = orig_msg
        record.args = orig_args
        return formatted
