"""The offline fixture dataset: records, name table and gazetteer.

A seeded generator produces a synthetic desk-scale stand-in for the live
dataset: 5000 records across the eight collection disciplines, plus a
small set of scenario records placed by hand so the canonical demo
queries return fixed counts (47 kangaroos in 1980s NSW, 23 frogs within
5 km of Castle Hill). Fixture files are line-oriented JSON in the
external field naming, so they diff and stream cleanly.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

from ..records import SpecimenRecord, haversine_km, to_external, validate_record

CASTLE_HILL_NSW = (-33.731, 151.004)
CASTLE_HILL_QLD = (-19.2866, 146.7786)

DISCIPLINES = (
    "Entomology", "Marine Invertebrates", "Ornithology", "Ichthyology",
    "Malacology", "Mammalogy", "Herpetology", "Arachnology",
)

_CATALOGUE_PREFIXES = {
    "Entomology": "K",
    "Marine Invertebrates": "P",
    "Ornithology": "O",
    "Ichthyology": "I",
    "Malacology": "C",
    "Mammalogy": "M",
    "Herpetology": "R",
    "Arachnology": "KS",
}

# (scientific, vernacular, discipline, phylum, class, order, family)
_SPECIES_POOL = (
    ("Ornithoptera richmondia", "Richmond Birdwing", "Entomology",
     "Arthropoda", "Insecta", "Lepidoptera", "Papilionidae"),
    ("Graphium macleayanum", "Macleay's Swallowtail", "Entomology",
     "Arthropoda", "Insecta", "Lepidoptera", "Papilionidae"),
    ("Delias nigrina", "Black Jezebel", "Entomology",
     "Arthropoda", "Insecta", "Lepidoptera", "Pieridae"),
    ("Tettigarcta crinita", "Hairy Cicada", "Entomology",
     "Arthropoda", "Insecta", "Hemiptera", "Tettigarctidae"),
    ("Mictis profana", "Crusader Bug", "Entomology",
     "Arthropoda", "Insecta", "Hemiptera", "Coreidae"),
    ("Catostylus mosaicus", "Blue Blubber Jellyfish", "Marine Invertebrates",
     "Cnidaria", "Scyphozoa", "Rhizostomeae", "Catostylidae"),
    ("Plagusia chabrus", "Red Bait Crab", "Marine Invertebrates",
     "Arthropoda", "Malacostraca", "Decapoda", "Plagusiidae"),
    ("Coscinasterias muricata", "Eleven-armed Seastar", "Marine Invertebrates",
     "Echinodermata", "Asteroidea", "Forcipulatida", "Asteriidae"),
    ("Austromegabalanus nigrescens", "Giant Rock Barnacle", "Marine Invertebrates",
     "Arthropoda", "Thecostraca", "Balanomorpha", "Balanidae"),
    ("Octopus tetricus", "Gloomy Octopus", "Marine Invertebrates",
     "Mollusca", "Cephalopoda", "Octopoda", "Octopodidae"),
    ("Ocyphaps lophotes", "Crested Pigeon", "Ornithology",
     "Chordata", "Aves", "Columbiformes", "Columbidae"),
    ("Dacelo novaeguineae", "Laughing Kookaburra", "Ornithology",
     "Chordata", "Aves", "Coraciiformes", "Alcedinidae"),
    ("Cacatua galerita", "Sulphur-crested Cockatoo", "Ornithology",
     "Chordata", "Aves", "Psittaciformes", "Cacatuidae"),
    ("Malurus cyaneus", "Superb Fairywren", "Ornithology",
     "Chordata", "Aves", "Passeriformes", "Maluridae"),
    ("Glossopsitta concinna", "Musk Lorikeet", "Ornithology",
     "Chordata", "Aves", "Psittaciformes", "Psittaculidae"),
    ("Phyllopteryx taeniolatus", "Weedy Seadragon", "Ichthyology",
     "Chordata", "Actinopterygii", "Syngnathiformes", "Syngnathidae"),
    ("Hippocampus whitei", "White's Seahorse", "Ichthyology",
     "Chordata", "Actinopterygii", "Syngnathiformes", "Syngnathidae"),
    ("Girella tricuspidata", "Luderick", "Ichthyology",
     "Chordata", "Actinopterygii", "Centrarchiformes", "Girellidae"),
    ("Pomacentrus coelestis", "Neon Damselfish", "Ichthyology",
     "Chordata", "Actinopterygii", "Perciformes", "Pomacentridae"),
    ("Lates calcarifer", "Barramundi", "Ichthyology",
     "Chordata", "Actinopterygii", "Perciformes", "Latidae"),
    ("Sepioteuthis australis", "Southern Calamari", "Malacology",
     "Mollusca", "Cephalopoda", "Myopsida", "Loliginidae"),
    ("Haliotis rubra", "Blacklip Abalone", "Malacology",
     "Mollusca", "Gastropoda", "Lepetellida", "Haliotidae"),
    ("Nautilus pompilius", "Chambered Nautilus", "Malacology",
     "Mollusca", "Cephalopoda", "Nautilida", "Nautilidae"),
    ("Thersites mitchellae", "Mitchell's Rainforest Snail", "Malacology",
     "Mollusca", "Gastropoda", "Stylommatophora", "Camaenidae"),
    ("Pinctada maxima", "Silver-lipped Pearl Oyster", "Malacology",
     "Mollusca", "Bivalvia", "Ostreida", "Margaritidae"),
    ("Petaurus breviceps", "Sugar Glider", "Mammalogy",
     "Chordata", "Mammalia", "Diprotodontia", "Petauridae"),
    ("Ornithorhynchus anatinus", "Platypus", "Mammalogy",
     "Chordata", "Mammalia", "Monotremata", "Ornithorhynchidae"),
    ("Phascolarctos cinereus", "Koala", "Mammalogy",
     "Chordata", "Mammalia", "Diprotodontia", "Phascolarctidae"),
    ("Tachyglossus aculeatus", "Short-beaked Echidna", "Mammalogy",
     "Chordata", "Mammalia", "Monotremata", "Tachyglossidae"),
    ("Vombatus ursinus", "Common Wombat", "Mammalogy",
     "Chordata", "Mammalia", "Diprotodontia", "Vombatidae"),
    ("Tiliqua scincoides", "Eastern Blue-tongue", "Herpetology",
     "Chordata", "Reptilia", "Squamata", "Scincidae"),
    ("Intellagama lesueurii", "Eastern Water Dragon", "Herpetology",
     "Chordata", "Reptilia", "Squamata", "Agamidae"),
    ("Morelia spilota", "Carpet Python", "Herpetology",
     "Chordata", "Reptilia", "Squamata", "Pythonidae"),
    ("Chelodina longicollis", "Eastern Long-necked Turtle", "Herpetology",
     "Chordata", "Reptilia", "Testudines", "Chelidae"),
    ("Varanus varius", "Lace Monitor", "Herpetology",
     "Chordata", "Reptilia", "Squamata", "Varanidae"),
    ("Atrax robustus", "Sydney Funnel-web Spider", "Arachnology",
     "Arthropoda", "Arachnida", "Araneae", "Atracidae"),
    ("Maratus volans", "Peacock Spider", "Arachnology",
     "Arthropoda", "Arachnida", "Araneae", "Salticidae"),
    ("Hadronyche versuta", "Blue Mountains Funnel-web", "Arachnology",
     "Arthropoda", "Arachnida", "Araneae", "Atracidae"),
    ("Nephila plumipes", "Humped Golden Orb-weaver", "Arachnology",
     "Arthropoda", "Arachnida", "Araneae", "Araneidae"),
    ("Missulena occatoria", "Red-headed Mouse Spider", "Arachnology",
     "Arthropoda", "Arachnida", "Araneae", "Actinopodidae"),
)

# Scenario species kept out of the random pool so the seeded counts for
# the demo queries cannot drift.
_KANGAROO = ("Macropus giganteus", "Eastern Grey Kangaroo", "Mammalogy",
             "Chordata", "Mammalia", "Diprotodontia", "Macropodidae")
_FROGS = (
    ("Litoria caerulea", "Green Tree Frog", "Herpetology",
     "Chordata", "Amphibia", "Anura", "Pelodryadidae"),
    ("Litoria peronii", "Peron's Tree Frog", "Herpetology",
     "Chordata", "Amphibia", "Anura", "Pelodryadidae"),
    ("Crinia signifera", "Common Eastern Froglet", "Herpetology",
     "Chordata", "Amphibia", "Anura", "Myobatrachidae"),
)
_BEETLE = ("Anoplognathus", None, "Entomology",
           "Arthropoda", "Insecta", "Coleoptera", "Scarabaeidae")

# (state, south, west, north, east, weight) -- rough mainland boxes
_STATE_BOXES = (
    ("New South Wales", -37.3, 141.0, -28.2, 153.5, 30),
    ("Queensland", -28.9, 138.0, -10.7, 153.4, 20),
    ("Victoria", -39.0, 141.0, -34.0, 149.9, 15),
    ("Western Australia", -35.0, 113.5, -14.0, 129.0, 10),
    ("South Australia", -38.0, 129.0, -26.0, 140.9, 8),
    ("Tasmania", -43.6, 144.6, -40.7, 148.4, 7),
    ("Northern Territory", -25.9, 129.0, -11.0, 137.9, 5),
    ("Australian Capital Territory", -35.9, 148.8, -35.1, 149.3, 5),
)

_SITE_FIRST = ("Wattle", "Boulder", "Iron", "Salt", "Reed", "Heron", "Falcon",
               "Cedar", "Granite", "Coral", "Banksia", "Mallee", "Brumby",
               "Jarrah", "Quoll", "Ibis", "Lyrebird", "Pelican", "Dune", "Basalt")
_SITE_SECOND = ("Creek", "Ridge", "Flat", "Gully", "Bay", "Point", "Swamp",
                "Plain", "Gorge", "Bend")

_COLLECTORS = (
    "R. Palmer", "J. Whitfield", "A. Musgrave", "E. Troughton", "H. Longman",
    "M. Archer", "S. Keogh", "G. Ingram", "L. Gibson", "P. Rowland",
    "D. Bickel", "K. Lambkin", "T. Moulds", "V. Framenau", "C. Reid",
    "B. Timms", "N. Tatarnic", "F. Koehler", "I. Loch", "W. Ponder",
    "J. Paxton", "M. McGrouther", "S. Ahyong", "A. Reid",
)

_DEFAULT_PLACES = (
    ("Castle Hill", "New South Wales", -33.731, 151.004),
    ("Sydney", "New South Wales", -33.8688, 151.2093),
    ("Parramatta", "New South Wales", -33.815, 151.0011),
    ("Broken Hill", "New South Wales", -31.9539, 141.4539),
    ("Richmond", "New South Wales", -33.5997, 150.7515),
    ("Richmond", "Queensland", -20.731, 143.14),
    ("Brisbane", "Queensland", -27.4698, 153.0251),
    ("Townsville", "Queensland", -19.259, 146.8169),
    ("Cairns", "Queensland", -16.9203, 145.771),
    ("Melbourne", "Victoria", -37.8136, 144.9631),
    ("Hobart", "Tasmania", -42.8821, 147.3272),
    ("Adelaide", "South Australia", -34.9285, 138.6007),
    ("Perth", "Western Australia", -31.9523, 115.8613),
    ("Darwin", "Northern Territory", -12.4634, 130.8456),
    ("Canberra", "Australian Capital Territory", -35.2809, 149.13),
)

_SCENARIO_RECORD_BUDGET = 89  # 47 kangaroos + 23 + 2 frogs + 14 beetles + 3 co-located


@dataclass(frozen=True)
class Place:
    name: str
    state: str
    latitude: float
    longitude: float


@dataclass(frozen=True)
class NamePair:
    vernacular: str
    scientific: str


@dataclass(frozen=True)
class FixtureStore:
    """Immutable in-memory stand-in for the three data upstreams."""

    records: tuple
    name_table: tuple
    places: tuple

    def __post_init__(self):
        ids = [r.record_id for r in self.records]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate record_id in fixture")
        scientifics = {r.scientific_name.lower() for r in self.records if r.scientific_name}
        vernaculars = {r.vernacular_name.lower() for r in self.records if r.vernacular_name}
        for pair in self.name_table:
            if (pair.scientific.lower() not in scientifics
                    and pair.vernacular.lower() not in vernaculars):
                raise ValueError(f"name_table entry references no record: {pair}")

    def __len__(self):
        return len(self.records)


class _Counters:
    """Per-discipline catalogue serials and deterministic record ids."""

    def __init__(self, rng: random.Random):
        self._rng = rng
        self._serials = {prefix: 0 for prefix in _CATALOGUE_PREFIXES.values()}

    def catalogue(self, discipline: str) -> str:
        prefix = _CATALOGUE_PREFIXES[discipline]
        self._serials[prefix] += 1
        return f"{prefix}.{self._serials[prefix]}"

    def record_id(self) -> str:
        r = self._rng
        return (f"{r.getrandbits(32):08x}-{r.getrandbits(16):04x}-"
                f"{r.getrandbits(16):04x}-{r.getrandbits(16):04x}-"
                f"{r.getrandbits(48):012x}")


def _weighted_state(rng: random.Random):
    boxes = _STATE_BOXES
    total = sum(b[5] for b in boxes)
    pick = rng.uniform(0, total)
    acc = 0.0
    for box in boxes:
        acc += box[5]
        if pick <= acc:
            return box
    return boxes[-1]


def _near_castle_hill(lat: float, lon: float, buffer_km: float = 6.0) -> bool:
    return (haversine_km(lat, lon, *CASTLE_HILL_NSW) <= buffer_km
            or haversine_km(lat, lon, *CASTLE_HILL_QLD) <= buffer_km)


def _make_sites(rng: random.Random, n_sites: int = 800):
    sites = []
    while len(sites) < n_sites:
        state, south, west, north, east, _ = _weighted_state(rng)
        lat = round(rng.uniform(south, north), 5)
        lon = round(rng.uniform(west, east), 5)
        if _near_castle_hill(lat, lon):
            continue
        name = f"{rng.choice(_SITE_FIRST)} {rng.choice(_SITE_SECOND)}"
        sites.append((name, state, lat, lon))
    return sites


def _taxonomy(species) -> dict:
    scientific, _, _, phylum, class_, order, family = species
    return {
        "kingdom": "Animalia",
        "phylum": phylum,
        "class": class_,
        "order": order,
        "family": family,
        "genus": scientific.split()[0],
        "species": scientific if " " in scientific else None,
    }


def _record(counters, species, *, latitude=None, longitude=None, locality=None,
            state=None, year=None, event_date=None, collector=None,
            image_count=0) -> SpecimenRecord:
    scientific, vernacular, discipline = species[0], species[1], species[2]
    record_id = counters.record_id()
    taxonomy = {k: v for k, v in _taxonomy(species).items() if v}
    urls = tuple(f"https://media.example.org/specimens/{record_id}/{k}.jpg"
                 for k in range(image_count))
    return SpecimenRecord(
        record_id=record_id,
        catalogue_number=counters.catalogue(discipline),
        scientific_name=scientific,
        vernacular_name=vernacular,
        taxonomy=taxonomy,
        latitude=latitude,
        longitude=longitude,
        locality=locality,
        state_province=state,
        event_year=year,
        event_date=event_date,
        collector=collector,
        image_urls=urls,
    )


def _synthetic_records(rng, counters, count, sites):
    records = []
    for _ in range(count):
        species = rng.choice(_SPECIES_POOL)
        latitude = longitude = locality = state = None
        if rng.random() < 0.84:
            name, state, slat, slon = rng.choice(sites)
            locality = name
            if rng.random() < 0.8:
                latitude, longitude = slat, slon
            else:
                latitude = round(slat + rng.uniform(-0.02, 0.02), 5)
                longitude = round(slon + rng.uniform(-0.02, 0.02), 5)
        else:
            state = _weighted_state(rng)[0]
            if rng.random() < 0.5:
                locality = f"{rng.choice(_SITE_FIRST)} {rng.choice(_SITE_SECOND)}"
        year = rng.randint(1900, 2025) if rng.random() < 0.9 else None
        event_date = None
        if year is not None and rng.random() < 0.5:
            event_date = f"{year}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"
        collector = rng.choice(_COLLECTORS) if rng.random() < 0.7 else None
        image_count = rng.randint(1, 3) if rng.random() < 0.3 else 0
        records.append(_record(
            counters, species, latitude=latitude, longitude=longitude,
            locality=locality, state=state, year=year, event_date=event_date,
            collector=collector, image_count=image_count))
    return records


def _scenario_records(rng, counters):
    """Hand-placed records behind the canonical demo counts."""
    records = []

    # 47 kangaroos matching NSW + 1980s; the documented example record
    # leads the series so it is the first search hit.
    first = SpecimenRecord(
        record_id="a1b2c3d4-e5f6-7890",
        catalogue_number=counters.catalogue("Mammalogy"),
        scientific_name=_KANGAROO[0],
        vernacular_name=_KANGAROO[1],
        taxonomy={k: v for k, v in _taxonomy(_KANGAROO).items() if v},
        latitude=-36.45, longitude=148.26,
        locality="Snowy Plains", state_province="New South Wales",
        event_year=1985, collector="R. Palmer",
    )
    records.append(first)
    for i in range(46):
        records.append(_record(
            counters, _KANGAROO,
            latitude=round(-36.45 + rng.uniform(-0.8, 0.8), 5),
            longitude=round(148.26 + rng.uniform(-0.9, 0.9), 5),
            locality="Snowy Plains", state="New South Wales",
            year=1980 + i % 10,
            collector=rng.choice(_COLLECTORS) if rng.random() < 0.7 else None,
            image_count=1 if rng.random() < 0.3 else 0))

    # 23 frog records strictly inside the 5 km Castle Hill (NSW) circle.
    for k in range(23):
        angle = 2 * math.pi * k / 23
        radius_deg = 0.010 + 0.010 * (k % 3)
        year = 1985 + k if k <= 20 else (1992, 2001)[k - 21]
        records.append(_record(
            counters, _FROGS[k % 3],
            latitude=round(CASTLE_HILL_NSW[0] + radius_deg * math.sin(angle), 5),
            longitude=round(CASTLE_HILL_NSW[1] + radius_deg * math.cos(angle), 5),
            locality="Castle Hill", state="New South Wales",
            year=min(year, 2005),
            collector=rng.choice(_COLLECTORS),
            image_count=1 if k % 4 == 0 else 0))

    # Two more frogs near the Queensland Castle Hill, for fan-out demos.
    for k in range(2):
        records.append(_record(
            counters, _FROGS[k],
            latitude=round(CASTLE_HILL_QLD[0] + 0.008 * (k + 1), 5),
            longitude=round(CASTLE_HILL_QLD[1] - 0.006 * (k + 1), 5),
            locality="Castle Hill", state="Queensland",
            year=1998 + k, collector=rng.choice(_COLLECTORS)))

    # Genus-level christmas beetle records: no vernacular name on the
    # records themselves, so only the name table reaches them.
    beetle_states = (["New South Wales"] * 6 + ["Queensland"] * 3
                     + ["Victoria"] * 3 + ["South Australia"] * 2)
    beetle_anchor = {"New South Wales": (-32.5, 147.0), "Queensland": (-24.0, 147.0),
                     "Victoria": (-36.8, 145.0), "South Australia": (-33.5, 137.0)}
    for i, state in enumerate(beetle_states):
        lat0, lon0 = beetle_anchor[state]
        records.append(_record(
            counters, _BEETLE,
            latitude=round(lat0 + rng.uniform(-1.2, 1.2), 5),
            longitude=round(lon0 + rng.uniform(-1.2, 1.2), 5),
            locality="Mallee Bend", state=state,
            year=1992 + i, collector=rng.choice(_COLLECTORS),
            image_count=1 if i % 5 == 0 else 0))

    # Three bird records sharing one exact position: a guaranteed
    # co-located group for carousel popups.
    trio_species = (_SPECIES_POOL[10], _SPECIES_POOL[13], _SPECIES_POOL[11])
    for i, species in enumerate(trio_species):
        records.append(_record(
            counters, species,
            latitude=-33.8696, longitude=151.2111,
            locality="Sydney Harbour Foreshore", state="New South Wales",
            year=2010 + i, collector="L. Gibson",
            image_count=1 if i == 0 else 0))

    return records


def _build_name_table(records):
    pairs = []
    seen = set()
    for record in records:
        if record.vernacular_name and record.scientific_name:
            key = (record.vernacular_name.lower(), record.scientific_name.lower())
            if key not in seen:
                seen.add(key)
                pairs.append(NamePair(record.vernacular_name, record.scientific_name))
    # table-only mapping: beetle records carry no vernacular themselves
    pairs.append(NamePair("Christmas Beetle", "Anoplognathus"))
    return tuple(pairs)


def generate_fixture(seed: int = 42, count: int = 5000) -> FixtureStore:
    """Deterministically generate the offline dataset.

    ``count`` is the total record count including the hand-placed
    scenario records.
    """
    if count < _SCENARIO_RECORD_BUDGET + 11:
        raise ValueError(f"count must be at least {_SCENARIO_RECORD_BUDGET + 11}")
    rng = random.Random(seed)
    counters = _Counters(rng)
    sites = _make_sites(rng)
    records = _synthetic_records(rng, counters, count - _SCENARIO_RECORD_BUDGET, sites)
    records.extend(_scenario_records(rng, counters))
    places = tuple(Place(*p) for p in _DEFAULT_PLACES)
    return FixtureStore(records=tuple(records),
                        name_table=_build_name_table(records),
                        places=places)


def save_fixture(store: FixtureStore, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "records.jsonl", "w", encoding="utf-8") as fh:
        for record in store.records:
            fh.write(json.dumps(to_external(record), ensure_ascii=False) + "\n")
    with open(directory / "names.json", "w", encoding="utf-8") as fh:
        json.dump([{"vernacular": p.vernacular, "scientific": p.scientific}
                   for p in store.name_table], fh, ensure_ascii=False, indent=1)
    with open(directory / "places.json", "w", encoding="utf-8") as fh:
        json.dump([{"name": p.name, "state": p.state,
                    "latitude": p.latitude, "longitude": p.longitude}
                   for p in store.places], fh, ensure_ascii=False, indent=1)


def load_fixture(directory) -> FixtureStore:
    directory = Path(directory)
    records = []
    with open(directory / "records.jsonl", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(validate_record(json.loads(line)))
    with open(directory / "names.json", encoding="utf-8") as fh:
        name_table = tuple(NamePair(d["vernacular"], d["scientific"])
                           for d in json.load(fh))
    with open(directory / "places.json", encoding="utf-8") as fh:
        places = tuple(Place(d["name"], d["state"], d["latitude"], d["longitude"])
                       for d in json.load(fh))
    return FixtureStore(records=tuple(records), name_table=name_table, places=places)
