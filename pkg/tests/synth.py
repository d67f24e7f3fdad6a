"""Deterministic synthetic contract generator for property and
performance tests. Mixes benign plumbing with vulnerable shapes and
defended (DM-covered) variants of each."""

import random


def _fn_benign_setter(rng, i):
    return f"""    function setConfig{i}(uint _v, address _who) public {{
        limit{i} = _v;
        agent{i} = _who;
        counter = counter + 1;
    }}""", f"    uint public limit{i};\n    address public agent{i};"


def _fn_math(rng, i):
    return f"""    function quote{i}(uint _a, uint _b) public pure returns (uint) {{
        uint num = _a * {rng.randint(2, 90)} + _b;
        uint den = _b + {rng.randint(1, 9)};
        return num / den;
    }}""", ""


def _fn_withdraw_vuln(rng, i):
    return f"""    function takeOut{i}(uint _amt) public {{
        require(ledger{i}[msg.sender] >= _amt);
        if (!msg.sender.call.value(_amt)()) {{ revert(); }}
        ledger{i}[msg.sender] = ledger{i}[msg.sender] - _amt;
    }}""", f"    mapping(address => uint) public ledger{i};"


def _fn_withdraw_guarded(rng, i):
    return f"""    function adminSweep{i}(address _t, uint _amt) public {{
        require(msg.sender == owner);
        stash{i}[_t] = stash{i}[_t] + 1;
        if (!_t.call.value(_amt)()) {{ revert(); }}
        stash{i}[_t] = 0;
    }}""", f"    mapping(address => uint) public stash{i};"


def _fn_lock_pattern(rng, i):
    return f"""    function pump{i}(address _t, uint _amt) public {{
        if (!busy{i}) {{
            marks{i}[_t] = marks{i}[_t] + _amt;
            busy{i} = true;
            if (!_t.call.value(_amt)()) {{ revert(); }}
            busy{i} = false;
            marks{i}[_t] = 0;
        }}
    }}""", f"    bool internal busy{i};\n    mapping(address => uint) public marks{i};"


def _fn_loop_require_send(rng, i):
    return f"""    function payRound{i}(uint _n) public {{
        for (uint i = 0; i < _n; i++) {{
            require(crew{i}[i].send(wage{i}));
        }}
    }}""", f"    mapping(uint => address) public crew{i};\n    uint public wage{i};"


def _fn_loop_bare_send(rng, i):
    return f"""    function drip{i}(uint _n) public {{
        for (uint i = 0; i < _n; i++) {{
            crowd{i}[i].send(drop{i});
        }}
    }}""", f"    mapping(uint => address) public crowd{i};\n    uint public drop{i};"


def _fn_loop_self_only(rng, i):
    return f"""    function cashback{i}(uint _n) public {{
        for (uint i = 0; i < _n; i++) {{
            address me = msg.sender;
            me.transfer(slice{i});
        }}
    }}""", f"    uint public slice{i};"


def _fn_txorigin_owner(rng, i):
    return f"""    function move{i}(address _to, uint _x) public {{
        require(tx.origin == owner);
        _to.transfer(_x);
    }}""", ""


def _fn_txorigin_sender(rng, i):
    return f"""    function ping{i}() public {{
        require(tx.origin == msg.sender);
        beat{i} = beat{i} + 1;
    }}""", f"    uint public beat{i};"


def _fn_unchecked_send(rng, i):
    return f"""    function tip{i}(address _to) public {{
        _to.send(gratuity{i});
        tipped{i} = tipped{i} + 1;
    }}""", f"    uint public gratuity{i};\n    uint public tipped{i};"


def _fn_checked_send(rng, i):
    return f"""    function refund{i}(address _to, uint _x) public {{
        require(_to.send(_x));
        refunds{i} = refunds{i} + 1;
    }}""", f"    uint public refunds{i};"


def _fn_selfdestruct_open(rng, i):
    return f"""    function scrap{i}() public {{
        selfdestruct(msg.sender);
    }}""", ""


def _fn_selfdestruct_guarded(rng, i):
    return f"""    function retire{i}() public {{
        require(msg.sender == owner);
        selfdestruct(owner);
    }}""", ""


def _fn_hardcoded_payee(rng, i):
    return f"""    function donate{i}(uint _x) public {{
        books{i}[msg.sender] = books{i}[msg.sender] + _x;
        charity.transfer(_x);
        books{i}[msg.sender] = 0;
    }}""", f"    mapping(address => uint) public books{i};"


MAKERS = [
    _fn_benign_setter, _fn_math, _fn_withdraw_vuln, _fn_withdraw_guarded,
    _fn_lock_pattern, _fn_loop_require_send, _fn_loop_bare_send,
    _fn_loop_self_only, _fn_txorigin_owner, _fn_txorigin_sender,
    _fn_unchecked_send, _fn_checked_send, _fn_selfdestruct_open,
    _fn_selfdestruct_guarded, _fn_hardcoded_payee,
]


def generate_contract(rng, name, n_functions=10):
    fns, decls = [], []
    for i in range(n_functions):
        maker = rng.choice(MAKERS)
        body, decl = maker(rng, i)
        fns.append(body)
        if decl:
            decls.append(decl)
    header = [
        "pragma solidity ^0.4.24;",
        "",
        f"contract {name} {{",
        "    address public owner;",
        "    address constant charity = 0x00000000000000000000000000000000deadbeef;",
        "    uint public counter;",
        *decls,
        "",
        f"    function {name}() public {{ owner = msg.sender; }}",
        "",
    ]
    return "\n".join(header + fns + ["}"]) + "\n"


def generate_corpus(tmpdir, n_contracts, seed=0, n_functions=10):
    rng = random.Random(seed)
    paths = []
    for k in range(n_contracts):
        name = f"Synth{k:04d}"
        text = generate_contract(rng, name, n_functions)
        p = tmpdir / f"{name.lower()}.sol"
        p.write_text(text, encoding="utf-8")
        paths.append(p)
    return paths
