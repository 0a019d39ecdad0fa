import io
import sys

__all__ = [ "SourceFile", "SourceString", "SourceStream" ]

class Source(object):
    # where a document comes from; .name shows up in error messages
    def __init__(self, name):
        self.name = name
        self.text = None

    def load(self):
        # child class must implement
        raise NotImplementedError

class SourceFile(Source):
    def load(self):
        with open(self.name, 'rb') as infile :
            self.text = infile.read().decode("utf-8")
        return self.text

class SourceString(Source):
    def __init__(self, input_str, name="<string>"):
        super().__init__(name)
        if isinstance(input_str, bytes):
            input_str = input_str.decode("utf-8")
        self.infile = io.StringIO(input_str)

    def load(self):
        self.text = self.infile.read()
        return self.text

class SourceStream(Source):
    # byte (or text) stream, e.g. stdin
    def __init__(self, stream, name=None):
        super().__init__(name or getattr(stream, "name", "<stream>"))
        self.stream = stream

    def load(self):
        data = self.stream.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        self.text = data
        return self.text

def open_source(path):
    # "-" means stdin, same as most command line tools
    if path == "-":
        return SourceStream(sys.stdin.buffer, "<stdin>")
    return SourceFile(path)
