"""
기본 클래스 카탈로그

목표 클래스 12종(의미 클러스터 6개, 클러스터당 2종)과 부모 클래스 7종으로 구성됩니다.
각 부모 클래스는 자신이 배치되는 방 종류를 가지며, 목표 클래스는 지정된 부모의 방 종류를 따릅니다.
"""
from core.domain.models import ClassCatalog, ClassSpec

ROOM_TYPES = ("kitchen", "living_room", "bedroom", "bathroom")

_PARENTS = (
    ClassSpec("CounterTop", "surface", size_m=1.0, height_m=0.9, is_parent=True, room_types=("kitchen",)),
    ClassSpec("Table", "surface", size_m=0.9, height_m=0.75, is_parent=True, room_types=("kitchen", "living_room")),
    ClassSpec("Dresser", "surface", size_m=0.8, height_m=0.8, is_parent=True, room_types=("bedroom",)),
    ClassSpec("Sink", "fixture", size_m=0.5, height_m=0.85, is_parent=True, room_types=("kitchen", "bathroom")),
    ClassSpec("Toilet", "fixture", size_m=0.5, height_m=0.45, is_parent=True, room_types=("bathroom",)),
    ClassSpec("Sofa", "seating", size_m=1.2, height_m=0.45, is_parent=True, room_types=("living_room",)),
    ClassSpec("Bed", "seating", size_m=1.4, height_m=0.5, is_parent=True, room_types=("bedroom",)),
)

_TARGETS = (
    ClassSpec("Mug", "drinkware", size_m=0.10, parent="CounterTop"),
    ClassSpec("Cup", "drinkware", size_m=0.10, parent="Table"),
    ClassSpec("Pan", "cookware", size_m=0.30, parent="CounterTop"),
    ClassSpec("Kettle", "cookware", size_m=0.25, parent="CounterTop"),
    ClassSpec("RemoteControl", "electronics", size_m=0.15, parent="Sofa"),
    ClassSpec("Laptop", "electronics", size_m=0.35, parent="Table"),
    ClassSpec("Book", "reading", size_m=0.20, parent="Dresser"),
    ClassSpec("Newspaper", "reading", size_m=0.30, parent="Sofa"),
    ClassSpec("Pillow", "soft", size_m=0.50, parent="Bed"),
    ClassSpec("TeddyBear", "soft", size_m=0.35, parent="Bed"),
    ClassSpec("SoapBottle", "toiletry", size_m=0.15, parent="Sink"),
    ClassSpec("ToiletPaper", "toiletry", size_m=0.12, parent="Toilet"),
)


def default_catalog() -> ClassCatalog:
    """내장 카탈로그를 반환합니다 (부모 7종 + 목표 12종)."""
    return ClassCatalog(_PARENTS + _TARGETS)
