from abc import ABCMeta, abstractmethod


BANNER = (
    "> Desk-scale reproduction. Absolute numbers are not comparable with "
    "full-scale benchmark results; compare rows and columns only."
)


class Converter(metaclass=ABCMeta):
    @abstractmethod
    def convert(self, *args, **kwargs) -> str:
        pass
