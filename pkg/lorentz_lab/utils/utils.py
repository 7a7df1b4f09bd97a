def kebab_to_snake(s: str) -> str:
    return s.replace("-", "_")


def snake_to_kebab(s: str) -> str:
    return s.replace("_", "-")


def add_snake_case_names(names: set) -> set:
    new_set = set()
    for item in names:
        new_set.add(item)
        new_set.add(kebab_to_snake(item))
    return new_set


def suite_method_name(suite: str) -> str:
    """Name of the lab method running a suite: ``affine-length`` -> ``suite_affine_length``."""
    return "suite_" + kebab_to_snake(snake_to_kebab(suite))


def lab_has_suite(lab: object, suite: str) -> bool:
    """Checks if a lab implements a specific suite"""
    return callable(getattr(lab, suite_method_name(suite), None))
