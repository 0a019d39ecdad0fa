#!/usr/bin/env python3

__all__ = [
    "Version",
]

# version of the instance/solution document format as well as the package
class Version(object):
    major = 0
    minor = 3

    @classmethod
    def vstring(cls):
        return "%d.%d" % (cls.major, cls.minor)
