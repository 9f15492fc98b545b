#!/usr/bin/env python3
"""Regenerate resources/<lang>/ from upstream open-licensed word lists.

Usage:
    python3 tools/build_resources.py <extracted-packages-dir> <resources-dir>

The packages dir must contain the unpacked wheels/sdists of:
    pattern3 3.0.0        (POS lexicons, BSD)
    textblob 0.20.x       (EN sentiment, MIT)
    textblob_fr 0.2.x     (FR sentiment, MIT)
    textblob_de 0.4.x     (DE sentiment, MIT)
    pyspellchecker 0.9.x  (word frequency dictionaries, MIT)
    spacy 3.8.x           (stop word lists, MIT)

Hand-curated lists (discourse markers, pronouns, negators, abbreviations,
closed-class POS entries, the Spanish sentiment lexicon) live in this file.
"""

import gzip
import json
import re
import sys
import xml.etree.ElementTree as ET
from collections import defaultdict
from pathlib import Path

LANGS = ["en", "fr", "de", "es"]
WORDLIST_SIZE = 60000
POS_SIZE = 40000
LETTERS = re.compile(r"^[^\W\d_]+(?:['’\-][^\W\d_]+)*$")

VOWELS = {
    "en": "aeiouy",
    "fr": "aeiouyàâäéèêëîïôöùûüÿæœ",
    "de": "aeiouyäöü",
    "es": "aeiouyáéíóúü",
}

DISCOURSE = {
    "en": """however
therefore
moreover
furthermore
in addition
additionally
consequently
thus
hence
nevertheless
nonetheless
in conclusion
to conclude
in summary
overall
for example
for instance
in fact
indeed
on the other hand
in contrast
by contrast
similarly
likewise
meanwhile
first
firstly
second
secondly
finally
lastly
as a result
in other words
that is
of course
although
though
whereas
besides
instead
otherwise
accordingly
subsequently
ultimately
notably
importantly
specifically
in particular
above all
after all
at the same time
on the contrary
even so
still
yet
also
then
because
since
so""",
    "fr": """cependant
pourtant
toutefois
néanmoins
donc
ainsi
alors
par conséquent
en conséquence
de plus
en outre
par ailleurs
d'ailleurs
en effet
en fait
en revanche
au contraire
par contre
de même
également
d'abord
tout d'abord
premièrement
deuxièmement
ensuite
puis
enfin
finalement
en conclusion
en résumé
pour conclure
par exemple
notamment
c'est-à-dire
autrement dit
bien que
quoique
tandis que
alors que
parce que
puisque
car
mais
or
en somme
en bref
surtout
d'une part
d'autre part
en particulier
aussi
pourtant""",
    "de": """jedoch
aber
allerdings
dennoch
trotzdem
deshalb
deswegen
daher
darum
folglich
somit
also
außerdem
zudem
ferner
darüber hinaus
überdies
zunächst
erstens
zweitens
drittens
dann
danach
anschließend
schließlich
zuletzt
letztlich
abschließend
zusammenfassend
beispielsweise
zum beispiel
etwa
nämlich
tatsächlich
in der tat
hingegen
dagegen
im gegensatz dazu
stattdessen
ebenso
gleichfalls
auch
weil
da
denn
obwohl
während
insbesondere
vor allem
mit anderen worten
das heißt
einerseits
andererseits
im übrigen
insgesamt""",
    "es": """sin embargo
no obstante
aunque
pero
por lo tanto
por tanto
por consiguiente
en consecuencia
así
así pues
entonces
además
asimismo
igualmente
también
incluso
por otra parte
por otro lado
en cambio
al contrario
por el contrario
de hecho
en efecto
en realidad
primero
en primer lugar
en segundo lugar
luego
después
finalmente
por último
en conclusión
en resumen
en definitiva
en suma
para concluir
por ejemplo
es decir
o sea
en otras palabras
en particular
sobre todo
especialmente
porque
ya que
puesto que
dado que
mientras que
pues
mientras tanto
a pesar de
de todos modos
en general""",
}

PRONOUNS = {
    "en": "i me my mine myself you your yours yourself yourselves he him his himself "
    "she her hers herself it its itself we us our ours ourselves they them their theirs themselves",
    "fr": "je j' me m' moi tu te t' toi il elle on nous vous ils elles le la les lui leur leurs "
    "se s' soi eux mon ma mes ton ta tes son sa ses notre nos votre vos",
    "de": "ich mich mir mein meine meinen meinem meiner meines du dich dir dein deine deinen deinem "
    "deiner deines er ihn ihm sein seine seinen seinem seiner seines sie ihr ihre ihren ihrem ihrer "
    "ihres es wir uns unser unsere unseren unserem unserer euch euer eure euren eurem eurer sich",
    "es": "yo me mí mi mis conmigo tú te ti tu tus contigo él ella ello lo la le se sí su sus "
    "consigo nosotros nosotras nos nuestro nuestra nuestros nuestras vosotros vosotras os vuestro "
    "vuestra vuestros vuestras ellos ellas los las les usted ustedes",
}

NEGATORS = {
    "en": "not no never none nobody nothing neither nor nowhere cannot without hardly barely don't doesn't didn't isn't aren't wasn't weren't can't won't couldn't shouldn't wouldn't",
    "fr": "ne n' pas non jamais rien personne aucun aucune ni guère plus sans",
    "de": "nicht kein keine keinen keinem keiner keines nie niemals nichts niemand weder noch ohne",
    "es": "no nunca jamás nada nadie ningún ninguno ninguna ni tampoco sin",
}

ABBREVIATIONS = {
    "en": "mr mrs ms dr prof sr jr st vs etc e.g i.e approx dept est fig inc ltd co corp no "
    "jan feb mar apr jun jul aug sep sept oct nov dec gen col lt sgt capt rev hon mt ft al",
    "fr": "m mm mme mmes mlle dr pr prof st ste etc cf p ex env av bd no vol fig chap janv "
    "févr avr juil sept oct nov déc",
    "de": "z.b bzw usw vgl ca dr prof nr str evtl ggf inkl u.a d.h z.t s.o o.ä etc bzgl jh jhd "
    "hl geb gest abs art bd mio mrd",
    "es": "sr sra srta dr dra ud uds etc p.ej pág núm no art cap vol fig ej dto av avda sto sta "
    "aprox ene feb mar abr jun jul ago sept oct nov dic",
}

CLOSED_CLASS = {
    "en": {
        "DET": "the a an this that these those each every some any no all both either neither another such",
        "PRON": "i me you he him she her it we us they them myself yourself himself herself itself ourselves "
        "themselves who whom whose which what my your his its our their mine yours hers ours theirs",
        "ADP": "of in on at by for with about against between into through during before after above below "
        "to from up down over under again than upon within without across along among around behind "
        "beyond toward towards via per despite",
        "CONJ": "and or but nor so yet because although though while whereas if unless since whether",
        "PART": "not to 's",
        "VERB": "is are was were be been being am has have had having do does did will would shall should "
        "can could may might must",
        "ADV": "very too also just only then there here now however therefore thus often always never "
        "sometimes",
    },
    "fr": {
        "DET": "le la les l' un une des du de d' au aux ce cet cette ces mon ma mes ton ta tes son sa ses "
        "notre nos votre vos leur leurs chaque quelques plusieurs tout toute tous toutes",
        "PRON": "je j' tu il elle on nous vous ils elles me m' te t' se s' moi toi lui eux soi y en qui que "
        "qu' dont où lequel laquelle lesquels ceci cela ça celui celle",
        "ADP": "à dans par pour sur sous avec sans entre vers chez contre depuis pendant avant après selon "
        "malgré parmi durant",
        "CONJ": "et ou mais donc or ni car que qu' si quand comme lorsque puisque",
        "PART": "ne n' pas",
        "VERB": "est sont était étaient être été a ont avait avaient avoir fait peut peuvent doit",
        "ADV": "très plus moins aussi bien encore déjà toujours jamais souvent ainsi alors",
    },
    "de": {
        "DET": "der die das den dem des ein eine einen einem einer eines dieser diese dieses diesen diesem "
        "jeder jede jedes jeden jedem kein keine keinen keinem keiner alle manche viele",
        "PRON": "ich du er sie es wir ihr mich dich ihn uns euch mir dir ihm ihnen sich man wer was "
        "welcher welche welches mein dein sein unser euer",
        "ADP": "in im an am auf aus bei mit nach seit von vom zu zum zur durch für gegen ohne um über unter "
        "vor hinter neben zwischen während wegen trotz",
        "CONJ": "und oder aber denn sondern doch dass weil ob wenn als obwohl damit sowie",
        "PART": "nicht zu",
        "VERB": "ist sind war waren sein gewesen hat haben hatte hatten wird werden wurde wurden kann "
        "können konnte muss müssen soll sollen",
        "ADV": "sehr auch noch schon nur immer oft dann hier dort heute so",
    },
    "es": {
        "DET": "el la los las lo un una unos unas este esta estos estas ese esa esos esas aquel aquella "
        "mi mis tu tus su sus nuestro nuestra cada todo toda todos todas algún alguna varios del al",
        "PRON": "yo tú él ella ello nosotros nosotras vosotros ellos ellas usted ustedes me te se nos os "
        "le les mí ti sí que quien quienes cual cuales esto eso",
        "ADP": "a ante bajo con contra de desde durante en entre hacia hasta mediante para por según sin "
        "sobre tras",
        "CONJ": "y e o u pero sino ni que porque aunque si como cuando mientras pues",
        "PART": "no",
        "VERB": "es son era eran ser sido fue fueron está están estaba ha han había hay puede pueden debe",
        "ADV": "muy más menos también ya siempre nunca aquí allí hoy así bien",
    },
}

# polarity, subjectivity; modeled on the scale of the English pattern lexicon.
ES_SENTIMENT = """bueno 0.7 0.6
buena 0.7 0.6
buenos 0.7 0.6
buenas 0.7 0.6
malo -0.7 0.67
mala -0.7 0.67
malos -0.7 0.67
malas -0.7 0.67
excelente 1.0 1.0
excelentes 1.0 1.0
magnífico 1.0 1.0
maravilloso 1.0 1.0
maravillosa 1.0 1.0
fantástico 0.9 0.9
fantástica 0.9 0.9
increíble 0.9 0.9
increíbles 0.9 0.9
genial 0.8 0.75
perfecto 1.0 1.0
perfecta 1.0 1.0
hermoso 0.85 1.0
hermosa 0.85 1.0
bello 0.85 1.0
bella 0.85 1.0
bonito 0.6 0.8
bonita 0.6 0.8
feliz 0.8 1.0
felices 0.8 1.0
alegre 0.7 0.8
triste -0.5 1.0
tristes -0.5 1.0
terrible -1.0 1.0
terribles -1.0 1.0
horrible -1.0 1.0
horribles -1.0 1.0
pésimo -1.0 1.0
peor -0.7 0.6
mejor 0.5 0.3
mejores 0.5 0.3
importante 0.4 1.0
importantes 0.4 1.0
fundamental 0.3 0.6
fundamentales 0.3 0.6
esencial 0.3 0.6
esenciales 0.3 0.6
crucial 0.4 0.7
significativo 0.375 0.875
significativa 0.375 0.875
relevante 0.3 0.5
interesante 0.5 0.5
interesantes 0.5 0.5
fascinante 0.6 0.9
fascinantes 0.6 0.9
impresionante 0.8 1.0
notable 0.4 0.5
notables 0.4 0.5
destacado 0.4 0.6
destacada 0.4 0.6
valioso 0.5 0.8
valiosa 0.5 0.8
útil 0.3 0.1
útiles 0.3 0.1
eficaz 0.4 0.5
eficiente 0.4 0.5
exitoso 0.6 0.8
exitosa 0.6 0.8
positivo 0.23 0.55
positiva 0.23 0.55
positivos 0.23 0.55
negativo -0.3 0.4
negativa -0.3 0.4
negativos -0.3 0.4
grande 0.0 0.375
grandes 0.0 0.375
gran 0.8 0.75
enorme 0.4 0.9
pequeño -0.25 0.4
pequeña -0.25 0.4
nuevo 0.14 0.45
nueva 0.14 0.45
nuevos 0.14 0.45
nuevas 0.14 0.45
antiguo 0.0 0.3
antigua 0.0 0.3
viejo 0.1 0.2
moderno 0.2 0.3
moderna 0.2 0.3
rico 0.4 0.6
rica 0.4 0.6
pobre -0.4 0.6
pobres -0.4 0.6
difícil -0.5 1.0
difíciles -0.5 1.0
fácil 0.43 0.83
fáciles 0.43 0.83
complejo -0.3 0.5
compleja -0.3 0.5
simple 0.0 0.36
sencillo 0.0 0.36
claro 0.1 0.38
clara 0.1 0.38
seguro 0.5 0.89
segura 0.5 0.89
peligroso -0.6 0.9
peligrosa -0.6 0.9
grave -0.3 0.5
graves -0.3 0.5
serio -0.33 0.67
fuerte 0.43 0.73
fuertes 0.43 0.73
débil -0.375 0.625
débiles -0.375 0.625
rápido 0.33 0.58
rápida 0.33 0.58
lento -0.3 0.4
lenta -0.3 0.4
feo -0.7 1.0
fea -0.7 1.0
amable 0.6 0.75
cruel -1.0 1.0
injusto -0.6 0.9
justo 0.35 0.65
justa 0.35 0.65
libre 0.4 0.8
libres 0.4 0.8
popular 0.6 0.8
populares 0.6 0.8
famoso 0.5 1.0
famosa 0.5 1.0
célebre 0.5 0.8
poderoso 0.3 1.0
poderosa 0.3 1.0
rico 0.375 0.625
sano 0.5 0.5
enfermo -0.7 0.9
fiel 0.4 0.6
extraño -0.2 0.7
extraña -0.2 0.7
raro -0.1 0.6
común -0.3 0.5
comunes -0.3 0.5
normal 0.15 0.65
único 0.375 1.0
única 0.375 1.0
especial 0.36 0.57
especiales 0.36 0.57
principal 0.17 0.5
principales 0.17 0.5
central 0.0 0.4
diverso 0.0 0.5
diversa 0.0 0.5
diversos 0.0 0.5
diversas 0.0 0.5
rica 0.375 0.625
profundo 0.0 0.4
profunda 0.0 0.4
amplio 0.0 0.4
amplia 0.0 0.4
vital 0.4 0.6
clave 0.0 0.5
innovador 0.5 0.8
innovadora 0.5 0.8
creativo 0.5 0.8
creativa 0.5 0.8
sostenible 0.3 0.5
duradero 0.2 0.5
violento -0.8 0.9
violenta -0.8 0.9
pacífico 0.3 0.6
pacífica 0.3 0.6
trágico -0.75 1.0
trágica -0.75 1.0
terrorífico -0.8 1.0
doloroso -0.6 0.9
dolorosa -0.6 0.9
cómodo 0.4 0.6
agradable 0.6 0.8
desagradable -0.6 0.9
preocupante -0.4 0.8
inquietante -0.4 0.8
alarmante -0.5 0.8
asombroso 0.7 0.9
sorprendente 0.5 0.9
emocionante 0.6 0.9
aburrido -0.5 1.0
aburrida -0.5 1.0
inútil -0.5 0.5
probable 0.0 0.5
posible 0.0 1.0
imposible -0.67 1.0
necesario 0.0 1.0
necesaria 0.0 1.0
verdadero 0.35 0.65
verdadera 0.35 0.65
falso -0.4 0.6
falsa -0.4 0.6
correcto 0.0 0.0
incorrecto -0.5 0.5
amor 0.5 0.6
odio -0.8 0.9
éxito 0.6 0.7
fracaso -0.6 0.7
problema -0.2 0.4
problemas -0.2 0.4
crisis -0.5 0.6
guerra -0.4 0.5
guerras -0.4 0.5
muerte -0.5 0.5
paz 0.5 0.5
esperanza 0.4 0.6
miedo -0.5 0.8
alegría 0.7 0.8
tristeza -0.6 0.8
belleza 0.7 0.8
riqueza 0.3 0.5
pobreza -0.5 0.6
violencia -0.7 0.7
libertad 0.4 0.5
progreso 0.4 0.5
avance 0.3 0.4
avances 0.3 0.4
beneficio 0.4 0.4
beneficios 0.4 0.4
ventaja 0.35 0.4
ventajas 0.35 0.4
desventaja -0.35 0.4
riesgo -0.3 0.5
riesgos -0.3 0.5
daño -0.5 0.5
daños -0.5 0.5
amenaza -0.5 0.6
logro 0.5 0.6
logros 0.5 0.6
desafío -0.1 0.4
desafíos -0.1 0.4
oportunidad 0.3 0.4
oportunidades 0.3 0.4
excelencia 0.8 0.9
bien 0.7 0.6
mal -0.7 0.67
mucho 0.2 0.2
muy 0.2 0.3
demasiado -0.2 0.5
afortunadamente 0.5 0.8
desafortunadamente -0.5 0.8
lamentablemente -0.5 0.9
claramente 0.1 0.4
realmente 0.2 0.5
especialmente 0.2 0.5
gustar 0.5 0.5
encantar 0.8 0.8
odiar -0.8 0.9
disfrutar 0.6 0.7
sufrir -0.6 0.7
temer -0.5 0.8
admirar 0.6 0.8
apreciar 0.5 0.6
criticar -0.4 0.6
"""


def read_lines(text):
    return sorted({w.strip().lower() for w in text.split("\n") if w.strip()})


def coarse_penn(tag):
    if tag.startswith("NN"):
        return "NOUN"
    if tag.startswith("VB") or tag == "MD":
        return "VERB"
    if tag.startswith("JJ"):
        return "ADJ"
    if tag.startswith("RB") or tag == "WRB":
        return "ADV"
    if tag in ("PRP", "PRP$", "WP", "WP$", "EX"):
        return "PRON"
    if tag in ("DT", "WDT", "PDT"):
        return "DET"
    if tag == "IN":
        return "ADP"
    if tag == "CC":
        return "CONJ"
    if tag == "CD":
        return "NUM"
    if tag in ("RP", "TO", "POS"):
        return "PART"
    if tag == "UH":
        return "INTJ"
    return None


def coarse_eagles(tag):
    head = tag[:1]
    return {
        "N": "NOUN",
        "V": "VERB",
        "A": "ADJ",
        "R": "ADV",
        "P": "PRON",
        "D": "DET",
        "S": "ADP",
        "C": "CONJ",
        "Z": "NUM",
        "I": "INTJ",
    }.get(head)


def coarse_stts(tag):
    if tag in ("NN", "NE", "NNS"):
        return "NOUN"
    if tag.startswith("V"):
        return "VERB"
    if tag.startswith("ADJ"):
        return "ADJ"
    if tag in ("ADV", "PAV", "PWAV", "PROAV"):
        return "ADV"
    if tag in ("PPER", "PPOSAT", "PPOSS", "PIS", "PDS", "PRF", "PRELS", "PWS", "PRELAT"):
        return "PRON"
    if tag.startswith("ART") or tag in ("PDAT", "PIAT", "PIDAT", "PWAT"):
        return "DET"
    if tag.startswith("APP") or tag == "APZR":
        return "ADP"
    if tag.startswith("KO") or tag == "KON":
        return "CONJ"
    if tag.startswith("CARD"):
        return "NUM"
    if tag.startswith("PTK"):
        return "PART"
    if tag == "ITJ":
        return "INTJ"
    return None


COARSE = {"en": coarse_penn, "fr": coarse_penn, "de": coarse_stts, "es": coarse_eagles}


def frequency(src, lang):
    path = src / "pyspellchecker" / "spellchecker" / "resources" / f"{lang}.json.gz"
    with gzip.open(path, "rt", encoding="utf-8") as fh:
        freq = json.load(fh)
    ranked = sorted(
        ((w.lower(), c) for w, c in freq.items() if LETTERS.match(w)),
        key=lambda kv: (-kv[1], kv[0]),
    )
    out = []
    seen = set()
    for w, _ in ranked:
        if w not in seen:
            seen.add(w)
            out.append(w)
    return out


def stop_words(src, lang):
    text = (src / "spacy_pkg" / "spacy" / "lang" / lang / "stop_words.py").read_text("utf-8")
    body = text.split('"""')[1]
    return sorted({w.lower().replace("’", "'") for w in body.split()})


def pos_lexicon(src, lang, allowed):
    path = src / "pattern3-3.0.0" / "pattern3" / "text" / lang / f"{lang}-lexicon.txt"
    tags = {}
    for line in path.read_text("utf-8").splitlines():
        if line.startswith(";;;") or not line.strip():
            continue
        parts = line.split()
        if len(parts) < 2:
            continue
        word, tag = parts[0].lower(), parts[1].split("|")[0]
        coarse = COARSE[lang](tag)
        if coarse is None or word not in allowed or word in tags:
            continue
        tags[word] = coarse
    for coarse, words in CLOSED_CLASS[lang].items():
        for w in words.split():
            tags[w.lower()] = coarse
    return tags


def sentiment(src, lang):
    if lang == "es":
        pol, subj = {}, {}
        for line in ES_SENTIMENT.strip().splitlines():
            w, p, s = line.split()
            pol[w] = float(p)
            subj[w] = float(s)
        return pol, subj
    path = {
        "en": src / "textblob" / "textblob" / "en" / "en-sentiment.xml",
        "fr": src / "textblob_fr" / "textblob_fr" / "fr-sentiment.xml",
        "de": src / "textblob_de" / "textblob_de" / "data" / "de-sentiment.xml",
    }[lang]
    acc = defaultdict(list)
    for el in ET.parse(path).getroot().iter("word"):
        form = el.get("form", "").lower()
        if not form or " " in form:
            continue
        acc[form].append((float(el.get("polarity", 0)), float(el.get("subjectivity", 0))))
    pol, subj = {}, {}
    for w, vals in acc.items():
        pol[w] = sum(v[0] for v in vals) / len(vals)
        subj[w] = sum(v[1] for v in vals) / len(vals)
    return pol, subj


def write_list(path, items):
    path.write_text("".join(f"{w}\n" for w in items), "utf-8")


def write_tsv(path, mapping, fmt):
    path.write_text("".join(f"{k}\t{fmt(v)}\n" for k, v in sorted(mapping.items())), "utf-8")


def main():
    src, dst = Path(sys.argv[1]), Path(sys.argv[2])
    for lang in LANGS:
        out = dst / lang
        out.mkdir(parents=True, exist_ok=True)
        ranked = frequency(src, lang)
        words = sorted(ranked[:WORDLIST_SIZE])
        stops = stop_words(src, lang)
        pos = pos_lexicon(src, lang, set(ranked[:POS_SIZE]))
        pol, subj = sentiment(src, lang)
        clamp = lambda v: max(-1.0, min(1.0, v))
        write_list(out / "words.txt", sorted(set(words) | set(stops)))
        write_list(out / "stopwords.txt", stops)
        write_list(out / "discourse.txt", read_lines(DISCOURSE[lang]))
        write_list(out / "pronouns.txt", read_lines(PRONOUNS[lang].replace(" ", "\n")))
        write_list(out / "negators.txt", read_lines(NEGATORS[lang].replace(" ", "\n")))
        write_list(out / "abbrev.txt", read_lines(ABBREVIATIONS[lang].replace(" ", "\n")))
        write_list(out / "vowels.txt", list(VOWELS[lang]))
        write_tsv(out / "pos.tsv", pos, str)
        write_tsv(out / "polarity.tsv", pol, lambda v: f"{clamp(v):.4f}")
        write_tsv(out / "subjectivity.tsv", subj, lambda v: f"{max(0.0, min(1.0, v)):.4f}")
        print(lang, len(words), len(stops), len(pos), len(pol))


if __name__ == "__main__":
    main()
