"""Assembly name listing through dnfile, formatted like parse_dotnet_names."""

import dnfile


def _q(ns, name):
    ns, name = ns.value, name.value
    return f"{ns}.{name}" if ns else name


def listing(data: bytes) -> set[str]:
    t = dnfile.dnPE(data=data).net.mdtables
    names = set()
    for r in t.TypeRef or ():
        names.add(_q(r.TypeNamespace, r.TypeName))
    for r in t.TypeDef or ():
        owner = _q(r.TypeNamespace, r.TypeName)
        names.add(owner)
        names.update(f"{owner}::{m.row.Name.value}" for m in r.MethodList)
    for r in t.MemberRef or ():
        parent = r.Class.row
        names.add(f"{_q(parent.TypeNamespace, parent.TypeName)}::{r.Name.value}")
    return names
