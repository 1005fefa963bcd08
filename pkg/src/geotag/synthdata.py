"""Built-in gazetteer and templates for synthetic earthquake tweets.

Place names run from one to four tokens. Template words never collide with
gazetteer tokens, so a generated mask is unambiguous. The first ten
templates mix zero, one, two and three slots; tests that need a small
template set take a prefix.
"""
from .corpus import Corpus, Gazetteer, synth_generate

PLACE_NAMES = [
    "kathmandu nepal",
    "mexico",
    "new york",
    "kermadec island",
    "new zealand",
    "tokyo",
    "baghdad",
    "kurdistan",
    "maasin",
    "philippines",
    "missouri",
    "tennessee",
    "tazeh abad kermanshah",
    "peru",
    "algeria",
    "iran",
    "central iraq",
    "los angeles",
    "san francisco bay area",
    "oaxaca",
    "chiapas state",
    "lima",
    "christchurch",
    "port au prince",
    "santiago de chile",
    "anchorage alaska",
    "sumatra",
    "bali",
    "istanbul",
    "mexico city",
    "salt lake city",
    "puerto rico",
    "quito",
    "manila",
    "cebu",
    "hokkaido",
    "kumamoto prefecture",
    "taipei",
    "hualien county",
    "athens",
    "crete",
    "naples",
    "amatrice",
    "central italy",
    "izmir",
    "van province",
    "islamabad",
    "kabul",
    "herat",
    "dhaka",
    "sikkim",
    "assam",
    "gujarat",
    "bhuj",
    "lombok",
    "palu",
    "sulawesi",
    "papua new guinea",
    "vanuatu",
    "fiji",
    "samoa",
    "tonga",
    "guam",
    "honolulu",
    "hilo hawaii",
    "reno nevada",
    "ridgecrest",
    "napa valley",
    "seattle",
    "vancouver island",
    "oklahoma",
    "tulsa",
    "el salvador",
    "guatemala city",
    "managua",
    "costa rica",
    "bogota",
    "caracas",
    "valparaiso",
    "mendoza",
]

TEMPLATES = [
    "earthquake felt in {LOC}",
    "strong earthquake in {LOC}",
    "just felt a big shake here stay safe everyone",
    "magnitude 5 quake hits {LOC} and {LOC}",
    "praying for everyone affected by the earthquake",
    "very strong earthquake felt here {LOC} {LOC}",
    "moderate earthquake near {LOC} in {LOC} no damage reported",
    "relief for earthquake victims in {LOC} please donate",
    "tremors reported across {LOC} {LOC} and {LOC}",
    "i had the same experience with the earthquake in {LOC} back in 2012",
    "breaking earthquake of magnitude 6 strikes {LOC}",
    "did anyone else feel that earthquake just now",
    "my friend lost everything in {LOC} earthquake can you help",
    "aftershocks continue near {LOC} residents told to stay outside",
    "usgs reports a shallow quake off the coast of {LOC}",
    "buildings collapsed in {LOC} after the earthquake",
    "earthquake drill today at school nothing to worry about",
    "quake hits {LOC} felt as far as {LOC}",
    "death toll rises in {LOC} rescue teams arrive from {LOC}",
    "the earthquake woke me up at 3 am",
    "tsunami warning issued for {LOC} after strong quake",
    "small earthquake felt here {LOC} {LOC}",
    "seismic intensity 4 recorded in {LOC} earlier today",
    "earthquake between {LOC} and {LOC} power cut in {LOC}",
    "sending love to {LOC} after last night",
    "my dog knew the earthquake was coming before we did",
    "schools closed in {LOC} until further notice",
    "rescue operations ongoing in {LOC}",
    "felt the earthquake all the way in {LOC} wow",
    "lost power after the quake anyone else",
]


FILLERS = [
    "rt", "omg", "wow", "breaking", "update", "news", "alert", "just", "now",
    "ugh", "so", "scary", "please", "share", "2day", "lol", "smh", "via", "usgs", "quake",
]


def default_gazetteer(size: int | None = None) -> Gazetteer:
    names = PLACE_NAMES if size is None else PLACE_NAMES[:size]
    return Gazetteer(tuple(tuple(name.split()) for name in names))


def default_templates(size: int | None = None) -> list[str]:
    return list(TEMPLATES if size is None else TEMPLATES[:size])


def desk_corpus(n: int = 1000, seed: int = 0) -> Corpus:
    """The desk-scale corpus: all templates and names, 0-4 leading and
    0-3 trailing filler words."""
    return synth_generate(default_gazetteer(), default_templates(), n, seed,
                          fillers=FILLERS, max_prefix=4, max_suffix=3)
