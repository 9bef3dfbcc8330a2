#!/usr/bin/env python3
"""Regenerate the schema fixtures, label sidecar and sample entities.

Run from the repository root: python3 fixtures/gen_fixtures.py
Ids in the 9xxxxxxx range are placeholders for items without a stable id.
"""

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent

LABELS = {
    # properties
    "P6": "head of government", "P17": "country", "P18": "image", "P19": "place of birth",
    "P20": "place of death", "P21": "sex or gender", "P22": "father", "P25": "mother",
    "P26": "spouse", "P27": "country of citizenship", "P31": "instance of", "P36": "capital",
    "P39": "position held", "P40": "child", "P50": "author", "P53": "family", "P54": "member of sports team",
    "P57": "director", "P61": "discoverer or inventor", "P69": "educated at", "P81": "connecting line",
    "P84": "architect", "P86": "composer", "P97": "noble title", "P101": "field of work",
    "P102": "member of political party", "P103": "native language", "P105": "taxon rank",
    "P106": "occupation", "P108": "employer", "P112": "founded by", "P115": "home venue",
    "P118": "league", "P123": "publisher", "P127": "owned by", "P131": "located in the administrative territorial entity",
    "P135": "movement", "P138": "named after", "P140": "religion or worldview", "P149": "architectural style",
    "P150": "contains the administrative territorial entity", "P159": "headquarters location",
    "P161": "cast member", "P166": "award received", "P169": "chief executive officer",
    "P170": "creator", "P171": "parent taxon", "P172": "ethnic group", "P175": "performer",
    "P176": "manufacturer", "P178": "developer", "P184": "doctoral advisor", "P185": "doctoral student",
    "P186": "made from material", "P195": "collection", "P197": "adjacent station",
    "P208": "executive body", "P241": "military branch", "P246": "element symbol",
    "P264": "record label", "P272": "production company", "P274": "chemical formula",
    "P276": "location", "P277": "programmed in", "P279": "subclass of", "P281": "postal code",
    "P282": "writing system", "P286": "head coach", "P287": "designed by", "P306": "operating system",
    "P348": "software version identifier", "P355": "has subsidiary", "P361": "part of",
    "P397": "parent astronomical body", "P400": "platform", "P404": "game mode",
    "P407": "language of work or name", "P410": "military rank", "P412": "voice type",
    "P413": "position played on team / speciality", "P414": "stock exchange",
    "P449": "original broadcaster", "P452": "industry", "P457": "foundational text",
    "P463": "member of", "P466": "occupant", "P495": "country of origin", "P511": "honorific prefix",
    "P512": "academic degree", "P556": "crystal system", "P569": "date of birth",
    "P570": "date of death", "P571": "inception", "P577": "publication date",
    "P580": "start time", "P582": "end time", "P585": "point in time", "P607": "conflict",
    "P608": "exhibition history", "P641": "sport", "P625": "coordinate location", "P664": "organizer",
    "P674": "characters", "P682": "biological process", "P684": "ortholog", "P688": "encodes",
    "P703": "found in taxon", "P735": "given name", "P734": "family name", "P737": "influenced by",
    "P740": "location of formation", "P780": "symptoms and signs", "P800": "notable work",
    "P803": "professorship", "P823": "speaker", "P856": "official website", "P868": "foods traditionally associated",
    "P880": "CPU", "P946": "ISIN", "P1001": "applies to jurisdiction", "P1037": "director / manager",
    "P1050": "medical condition", "P1056": "product or material produced", "P1066": "student of",
    "P1080": "from narrative universe", "P1082": "population", "P1083": "maximum capacity",
    "P1086": "atomic number", "P1098": "number of speakers", "P1101": "floors above ground",
    "P1104": "number of pages", "P1113": "number of episodes", "P1120": "number of deaths",
    "P1128": "employees", "P1132": "number of participants", "P1142": "political ideology",
    "P1303": "instrument", "P1308": "officeholder", "P1339": "number of injured",
    "P1343": "described by source", "P1352": "ranking", "P1387": "political alignment",
    "P1399": "convicted of", "P1411": "nominated for", "P1412": "languages spoken, written or signed",
    "P1416": "affiliation", "P1435": "heritage designation", "P1441": "present in work",
    "P1451": "motto text", "P1454": "legal form", "P1476": "title", "P1477": "birth name",
    "P1596": "penalty", "P1640": "curator", "P1813": "short name", "P1867": "eligible voters",
    "P1868": "ballots cast", "P2002": "X username", "P2012": "cuisine", "P2043": "length",
    "P2044": "elevation above sea level", "P2046": "area", "P2047": "duration", "P2048": "height",
    "P2050": "wingspan", "P2067": "mass", "P2109": "nominal power output", "P2124": "member count",
    "P2139": "total revenue", "P2176": "drug or therapy used for treatment",
    "P2196": "students count", "P2225": "discharge", "P2286": "arterial supply",
    "P2293": "genetic association", "P2370": "conversion to SI unit", "P2388": "office held by head of the organization",
    "P2389": "organization directed by the office or position", "P2437": "number of seasons",
    "P2541": "operating area", "P2578": "is the study of", "P2579": "studied in",
    "P2583": "distance from Earth", "P2630": "cost of damage", "P2650": "interested in",
    "P2770": "source of income", "P2789": "connects with", "P2896": "publication interval",
    "P3320": "board member", "P3373": "sibling", "P3719": "regulated by", "P3752": "worst-case time complexity",
    "P5061": "unit symbol", "P7937": "form of creative work", "P8031": "perpetrator",
    # items
    "Q5": "human", "Q30": "United States of America", "Q68": "computer", "Q89": "apple",
    "Q198": "war", "Q515": "city", "Q532": "village", "Q571": "book", "Q634": "planet",
    "Q728": "weapon", "Q1004": "comics", "Q3863": "asteroid", "Q3918": "university",
    "Q3947": "house", "Q4022": "river", "Q4917": "United States dollar", "Q6256": "country",
    "Q7187": "gene", "Q7278": "political party", "Q7366": "song", "Q7397": "software",
    "Q7889": "video game", "Q7946": "mineral", "Q8054": "protein", "Q8063": "rock",
    "Q8366": "algorithm", "Q8502": "mountain", "Q11173": "chemical compound",
    "Q11344": "chemical element", "Q11424": "film", "Q11436": "aircraft", "Q11707": "restaurant",
    "Q12136": "disease", "Q16521": "taxon", "Q16970": "church building", "Q19837": "Steve Jobs",
    "Q23397": "lake", "Q34038": "waterfall", "Q34770": "language", "Q40231": "election",
    "Q41176": "building", "Q41298": "magazine", "Q42889": "vehicle", "Q47574": "unit of measurement",
    "Q65943": "theorem", "Q82059": "Nasdaq", "Q134161": "joint-stock company",
    "Q163740": "nonprofit organization", "Q172771": "Royal Navy", "Q176799": "military unit",
    "Q178561": "battle", "Q189290": "military officer", "Q265852": "Tim Cook",
    "Q312": "Apple Inc.", "Q327333": "government agency", "Q332591": "Ronald Wayne",
    "Q482994": "album", "Q483382": "Steve Wozniak", "Q486972": "human settlement",
    "Q783794": "company", "Q820655": "statute", "Q839954": "archaeological site",
    "Q847017": "sports club", "Q891723": "public company", "Q1002697": "periodical literature",
    "Q1961036": "Beats Electronics", "Q2020153": "academic conference", "Q2766": "iPhone",
    "Q2796": "iPad", "Q3305213": "painting", "Q3839081": "disaster", "Q4164871": "position",
    "Q4830453": "business", "Q4936952": "anatomical structure", "Q5398426": "television series",
    "Q6881511": "enterprise", "Q7725634": "literary work", "Q11661": "information technology",
    "Q11862829": "academic discipline", "Q13406554": "sports competition",
    "Q13780930": "worldwide", "Q189471": "Cupertino",
    "Q90000101": "technical specification", "Q90000201": "ceremony", "Q90000301": "electronic device",
    "Q90000401": "James Humphrey Walwyn", "Q90000402": "Apple Design Award",
}

CATEGORIES = [
    "people", "places", "creative_works_media", "knowledge",
    "science", "organizations", "events_actions", "products_artifacts",
]

DISPLAY = {
    "people": "Person", "places": "Place", "creative_works_media": "Work",
    "knowledge": "Knowledge", "science": "Science", "organizations": "Organization",
    "events_actions": "Event", "products_artifacts": "Product",
}

CORE = {
    "people": ["P21", "P569", "P570", "P19", "P20", "P27"],
    "places": ["P17", "P625", "P131"],
    "creative_works_media": ["P577", "P407", "P1476"],
    "knowledge": ["P2579"],
    "science": ["P1343"],
    "organizations": ["P571", "P856", "P159", "P17"],
    "events_actions": ["P585", "P580", "P582"],
    "products_artifacts": ["P176", "P577"],
}


def ind(*props, **values):
    """Presence indicators for `props`, value indicators from keyword pairs."""
    out = [(p, []) for p in props]
    out += [(p, v) for p, v in values.items()]
    return out


# name -> (indicators, value props). Value-typed P31 indicators double as gate sync.
INTRINSIC = {
    "people": {
        "biography": (ind(P31=["Q5"]), ["P1477", "P735", "P734"]),
        "physical": (ind("P2048"), ["P2048", "P2067"]),
        "career": (ind("P106"), ["P106", "P108"]),
        "honorifics": (ind("P511"), ["P511"]),
        "linguistics": (ind("P1412"), ["P1412", "P103"]),
        "nobility": (ind("P97"), ["P97", "P53"]),
        "athletics_stats": (ind("P1352"), ["P1352"]),
    },
    "places": {
        "dwelling": (ind(P31=["Q3947", "Q41176"]), ["P466", "P1101"]),
        "commercial": (ind(P31=["Q11707"]), ["P1083"]),
        "heritage": (ind(P31=["Q839954"]), ["P1435"]),
        "nature": (ind(P31=["Q8502", "Q4022", "Q23397"]), ["P2044", "P2043", "P2046"]),
        "architecture": (ind(P31=["Q16970"]), ["P149", "P84"]),
        "settlement": (ind(P31=["Q515", "Q486972", "Q532", "Q6256"]), ["P1082", "P281"]),
        "hydrology": (ind(P31=["Q34038"]), ["P2225"]),
    },
    "creative_works_media": {
        "literature": (ind(P31=["Q7725634", "Q571"]), ["P1104", "P7937"]),
        "film": (ind(P31=["Q11424"]), ["P2047", "P272", "P161"]),
        "television": (ind(P31=["Q5398426"]), ["P2437", "P1113"]),
        "art": (ind(P31=["Q3305213"]), ["P186"]),
        "comics": (ind(P31=["Q1004"]), ["P123"]),
        "periodical": (ind(P31=["Q1002697", "Q41298"]), ["P2896", "P123"]),
        "music": (ind(P31=["Q482994", "Q7366"]), ["P175", "P264", "P2047"]),
    },
    "knowledge": {
        "language": (ind(P31=["Q34770"]), ["P282", "P1098"]),
        "theorem": (ind(P31=["Q65943"]), ["P61"]),
        "algorithm": (ind(P31=["Q8366"]), ["P3752"]),
        "specification": (ind(P31=["Q90000101"]), ["P348"]),
        "law": (ind(P31=["Q820655"]), ["P457"]),
        "unit": (ind(P31=["Q47574"]), ["P2370", "P5061"]),
        "field": (ind(P31=["Q11862829"]), ["P2578"]),
    },
    "science": {
        "element": (ind(P31=["Q11344"]), ["P1086", "P246"]),
        "compound": (ind(P31=["Q11173"]), ["P274", "P2067"]),
        "mineral": (ind(P31=["Q7946"]), ["P556"]),
        "geology": (ind(P31=["Q8063"]), ["P186"]),
        "disease": (ind(P31=["Q12136"]), ["P780", "P2176"]),
        "anatomy": (ind(P31=["Q4936952"]), ["P2286"]),
        "astronomy": (ind(P31=["Q634", "Q3863"]), ["P2583", "P397"]),
    },
    "organizations": {
        "corporation": (ind("P1128", P31=["Q6881511", "Q891723", "Q783794"]), ["P1128", "P1056", "P452", "P946"]),
        "nonprofit": (ind(P31=["Q163740"]), ["P2770"]),
        "university": (ind(P31=["Q3918"]), ["P2196", "P1037"]),
        "agency": (ind(P31=["Q327333"]), ["P2388"]),
        "club": (ind(P31=["Q847017"]), ["P115", "P286"]),
        "party": (ind(P31=["Q7278"]), ["P2124", "P1813"]),
        "military_unit": (ind(P31=["Q176799"]), ["P1451"]),
    },
    "events_actions": {
        "battle": (ind(P31=["Q178561"]), ["P1120", "P1339"]),
        "election": (ind(P31=["Q40231"]), ["P1867", "P1868"]),
        "disaster_event": (ind(P31=["Q3839081"]), ["P2630"]),
        "competition": (ind(P31=["Q13406554"]), ["P1132"]),
        "ceremony": (ind(P31=["Q90000201"]), ["P823"]),
        "war": (ind(P31=["Q198"]), ["P1120"]),
        "meeting": (ind(P31=["Q2020153"]), ["P1132"]),
    },
    "products_artifacts": {
        "software": (ind(P31=["Q7397"]), ["P348", "P277"]),
        "vehicle": (ind(P31=["Q42889"]), ["P2067"]),
        "aircraft": (ind(P31=["Q11436"]), ["P2050"]),
        "computer": (ind(P31=["Q68"]), ["P880"]),
        "game": (ind(P31=["Q7889"]), ["P404"]),
        "device": (ind(P31=["Q90000301"]), ["P2109"]),
        "weapon": (ind(P31=["Q728"]), ["P2067"]),
    },
}

RELATIONAL = {
    "religion": (ind("P140"), ["P140"]),
    "military": (ind("P241", "P607"), ["P241", "P607", "P410"]),
    "government": (ind("P39", "P208", "P1001"), ["P39", "P208", "P1001"]),
    "legal": (ind("P1454", "P3719"), ["P1454", "P3719"]),
    "politics": (ind("P102", "P1387"), ["P102", "P1387", "P1142"]),
    "entertainment": (ind("P264", "P1303"), ["P264", "P1303", "P412"]),
    "education": (ind("P69", "P1066", "P2196"), ["P69", "P1066", "P184", "P185", "P512", "P803"]),
    "sports": (ind("P641", "P54", "P118"), ["P641", "P54", "P118", "P413"]),
    "finance": (ind("P169", "P414", "P2139"), ["P169", "P414", "P2139", "P3320"]),
    "award": (ind("P166", "P1411"), ["P166", "P1411"]),
    "culture": (ind("P135", "P138"), ["P135", "P138"]),
    "healthcare": (ind("P1050", "P2293"), ["P1050", "P2293", "P780"]),
    "society": (ind("P172", "P2650"), ["P172", "P2650"]),
    "transportation": (ind("P81", "P197"), ["P81", "P197"]),
    "food": (ind("P2012", "P868"), ["P2012", "P868"]),
    "location": (ind("P276", "P495", "P740"), ["P276", "P495", "P740"]),
    "international": (ind("P2541"), ["P2541"]),
    "crime": (ind("P1399"), ["P1399", "P1596"]),
    "affiliation": (ind("P112", "P355", "P463"), ["P112", "P127", "P355", "P361", "P463"]),
    "technology": (ind("P1056", "P178"), ["P178", "P287", "P1056"]),
    "family": (ind("P22", "P25", "P26", "P40", "P3373"), ["P22", "P25", "P26", "P40", "P3373"]),
    "creativity": (ind("P800"), ["P800", "P737"]),
    "genomics": (ind("P688", P31=["Q7187", "Q8054"]), ["P688", "P684", "P703"]),
    "biofunction": (ind("P682"), ["P682"]),
    "organism": (ind("P171", P31=["Q16521"]), ["P171", "P105"]),
    "broadcast": (ind("P449"), ["P449"]),
    "authorship": (ind("P50", "P170"), ["P50", "P170", "P57", "P86"]),
    "character": (ind("P674"), ["P674"]),
    "museum": (ind("P195"), ["P195", "P608"]),
    "administration": (ind("P6", "P36"), ["P6", "P36", "P150"]),
    "infrastructure": (ind("P2789"), ["P2789", "P84"]),
    "conference": (ind("P664"), ["P664", "P823"]),
    "exhibition": (ind("P1640"), ["P1640"]),
    "violence": (ind("P8031"), ["P8031"]),
    "jurisdiction": (ind("P1001"), ["P1001"]),
    "position": (ind(P31=["Q4164871"]), ["P1308", "P2389"]),
    "cloud": (ind("P306"), ["P306", "P400"]),
    "fiction": (ind("P1441"), ["P1441", "P1080"]),
}

MEMBERSHIP = {
    "people": ["religion", "military", "government", "legal", "politics", "entertainment",
               "education", "sports", "finance", "award", "culture", "healthcare", "society",
               "crime", "family", "creativity"],
    "places": ["religion", "military", "entertainment", "education", "sports", "finance",
               "culture", "healthcare", "transportation", "food", "affiliation",
               "administration", "infrastructure"],
    "creative_works_media": ["religion", "military", "sports", "award", "culture", "location",
                             "authorship", "character", "museum"],
    "knowledge": ["religion", "international", "jurisdiction", "position"],
    "science": ["education", "healthcare", "genomics", "biofunction", "organism"],
    "organizations": ["religion", "military", "government", "legal", "politics",
                      "entertainment", "education", "sports", "finance", "award", "culture",
                      "healthcare", "society", "transportation", "food", "location",
                      "international", "crime", "affiliation", "technology", "broadcast"],
    "events_actions": ["religion", "military", "government", "legal", "politics",
                       "entertainment", "education", "sports", "award", "society",
                       "transportation", "location", "international", "crime", "conference",
                       "exhibition", "violence"],
    "products_artifacts": ["religion", "military", "entertainment", "award", "transportation",
                           "food", "technology", "cloud", "fiction"],
}


def gates_of(category):
    out = []
    for name, (indicators, _) in INTRINSIC[category].items():
        for p, values in indicators:
            if p == "P31":
                out += values
    for name in MEMBERSHIP[category]:
        for p, values in RELATIONAL[name][0]:
            if p == "P31":
                out += values
    return out


def line(indent, text, ident, labels):
    label = labels.get(ident)
    return f"{indent}{text}  # {label}" if label else f"{indent}{text}"


def category_yaml(category, gates, core, modules, labels):
    out = [f"category: {category}", "gates:"]
    out += [line("  ", f"- {g}", g, labels) for g in gates]
    out.append("core_properties:" if core else "core_properties: []")
    out += [line("  ", f"- {p}", p, labels) for p in core]
    out.append("modules:")
    for name, kind, indicators, props in modules:
        out.append(f"  {name}:")
        out.append(f"    type: {kind}")
        out.append("    indicators:")
        for p, values in indicators:
            out.append(line("      ", f"{p}:", p, labels))
            out += [line("        ", f"- {v}", v, labels) for v in values]
        out.append("    value_props:")
        out += [line("      ", f"- {p}", p, labels) for p in props]
    return "\n".join(out) + "\n"


def write_schema(directory, version, categories, labels):
    directory.mkdir(parents=True, exist_ok=True)
    for old in directory.glob("*.yaml"):
        old.unlink()
    for cid, text in categories:
        (directory / f"{cid}.yaml").write_text(text)
    listing = "\n".join(f"  - {cid}" for cid, _ in categories)
    (directory / "priority.yaml").write_text(f'version: "{version}"\ncategories:\n{listing}\n')


def main_schema():
    files = []
    for cid in CATEGORIES:
        modules = [(n, "intrinsic", i, v) for n, (i, v) in INTRINSIC[cid].items()]
        modules += [(n, "relational", *RELATIONAL[n]) for n in MEMBERSHIP[cid]]
        files.append((cid, category_yaml(cid, gates_of(cid), CORE[cid], modules, LABELS)))
    write_schema(ROOT / "schema", "1.0", files, LABELS)


# Occupations per education facet. Known ids first, placeholders fill the count.
FACETS = [
    ("natural_science", 22, ["Q864503", "Q2374149", "Q3779582", "Q3640160", "Q350979",
                             "Q3055126", "Q1225716", "Q2487799", "Q15839134", "Q18805",
                             "Q12773412", "Q4205432"]),
    ("humanities", 16, []), ("teaching", 13, []), ("engineering", 11, []),
    ("physical_science", 9, []), ("social_science", 6, []), ("general_academic", 5, []),
    ("literary", 3, []), ("information", 2, []),
]
FACET_LABELS = {
    "Q864503": "biologist", "Q2374149": "botanist", "Q3779582": "microbiologist",
    "Q3640160": "marine biologist", "Q350979": "zoologist", "Q3055126": "entomologist",
    "Q1225716": "ornithologist", "Q2487799": "mycologist", "Q15839134": "ecologist",
    "Q18805": "naturalist", "Q12773412": "parasitologist", "Q4205432": "ichthyologist",
}


def education_schema(labels):
    modules = [("biography", "intrinsic", ind(P31=["Q5"]), ["P1477", "P735", "P734"])]
    next_id = 91000001
    for name, count, known in FACETS:
        occupations = list(known)
        while len(occupations) < count:
            qid = f"Q{next_id}"
            labels[qid] = f"{name.replace('_', ' ')} occupation {len(occupations) + 1}"
            occupations.append(qid)
            next_id += 1
        modules.append((name, "relational", ind("P101", "P69", P106=occupations),
                        ["P101", "P69", "P512", "P184", "P185", "P1416", "P803"]))
    text = category_yaml("people", ["Q5"], CORE["people"], modules, labels)
    write_schema(ROOT / "education", "education-facets", [("people", text)], labels)


def snak(p, value):
    if isinstance(value, str) and value.startswith("Q"):
        dv = {"type": "wikibase-entityid",
              "value": {"entity-type": "item", "numeric-id": int(value[1:]), "id": value}}
    elif isinstance(value, str) and value.startswith("+") and "T" in value:
        dv = {"type": "time", "value": {"time": value, "timezone": 0, "before": 0, "after": 0,
                                        "precision": 11,
                                        "calendarmodel": "http://www.wikidata.org/entity/Q1985727"}}
    elif isinstance(value, tuple):
        amount, unit = value
        unit = f"http://www.wikidata.org/entity/{unit}" if unit else "1"
        dv = {"type": "quantity", "value": {"amount": amount, "unit": unit}}
    else:
        dv = {"type": "string", "value": value}
    return {"snaktype": "value", "property": p, "datavalue": dv}


def entity(qid, label, description, claims):
    out = {"type": "item", "id": qid,
           "labels": {"en": {"language": "en", "value": label}},
           "descriptions": {"en": {"language": "en", "value": description}},
           "claims": {}}
    for p, values in claims:
        statements = []
        for v in values:
            qualifiers = {}
            if isinstance(v, list):
                v, quals = v[0], v[1:]
                for qp, qv in quals:
                    qualifiers.setdefault(qp, []).append(snak(qp, qv))
            st = {"mainsnak": snak(p, v), "type": "statement", "rank": "normal"}
            if qualifiers:
                st["qualifiers"] = qualifiers
            statements.append(st)
        out["claims"][p] = statements
    return json.dumps(out, ensure_ascii=False)


def entities():
    apple = entity("Q312", "Apple Inc.", "American multinational technology company", [
        ("P31", ["Q4830453", "Q6881511", "Q891723"]),
        ("P17", ["Q30"]),
        ("P159", ["Q189471"]),
        ("P571", ["+1976-04-01T00:00:00Z"]),
        ("P856", ["https://www.apple.com/"]),
        ("P1128", [[("+164000", None), ("P585", "+2023-09-30T00:00:00Z")]]),
        ("P1056", ["Q2766", "Q2796"]),
        ("P452", ["Q11661"]),
        ("P946", ["US0378331005"]),
        ("P112", ["Q483382", "Q332591", "Q19837"]),
        ("P355", ["Q1961036"]),
        ("P169", [[("Q265852"), ("P580", "+2011-08-24T00:00:00Z")]]),
        ("P414", ["Q82059"]),
        ("P2139", [("+383285000000", "Q4917")]),
        ("P276", ["Q189471"]),
        ("P495", ["Q30"]),
        ("P740", ["Q189471"]),
        ("P166", ["Q90000402"]),
        ("P1454", ["Q134161"]),
        ("P2541", ["Q13780930"]),
        ("P138", ["Q89"]),
        ("P2002", ["Apple"]),
    ])
    walwyn = entity("Q90000401", "James Humphrey Walwyn", "Royal Navy officer", [
        ("P31", ["Q5"]),
        ("P106", [["Q189290", ("P241", "Q172771")]]),
    ])
    directory = ROOT / "entities"
    directory.mkdir(exist_ok=True)
    (directory / "apple.jsonl").write_text(apple + "\n")
    (directory / "walwyn.jsonl").write_text(walwyn + "\n")


def main():
    labels = dict(LABELS)
    labels.update(FACET_LABELS)
    main_schema()
    education_schema(labels)
    entities()
    rows = sorted(labels.items(), key=lambda kv: (kv[0][0], int(kv[0][1:])))
    (ROOT / "labels.tsv").write_text("".join(f"{k}\t{v}\n" for k, v in rows))
    (ROOT / "display_names.json").write_text(json.dumps(DISPLAY, indent=2) + "\n")


if __name__ == "__main__":
    main()
