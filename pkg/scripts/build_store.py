#!/usr/bin/env python3
"""Build the bundled 42-signature store from the learning corpus, then
verify that scanning the CB fixture suite with the full store still
produces exactly the expected reported/suppressed sets.

Run from the repo root:  PYTHONPATH=src python3 scripts/build_store.py
"""

import shutil
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from avscan import bundled_store_dir, fixture_dir
from avscan.avs import curate_avs, extract_avs, save_avs, signature_from_segment
from avscan.frontend import parse_source
from avscan.matcher import MatchConfig
from avscan.normalize import collect_type_names, normalize_function
from avscan.scan import scan_paths
from avscan.treedist import pairwise_distances, cluster

LEARN = fixture_dir() / "learning"


def segments_of(path):
    unit = parse_source(Path(path).read_text(), str(path))
    tn = collect_type_names(unit)
    out = []
    for c in unit.contracts:
        for f in c.functions:
            if f.body is not None and f.body.children and not f.is_constructor:
                out.append(normalize_function(f, c, tn))
    return out


def first_segment(path):
    segs = segments_of(path)
    assert segs, f"no function segments in {path}"
    return segs[0]


def learn_group(paths, vuln_type, avs_id):
    """One signature from a group of sample files (cluster of all of them)."""
    segs = [first_segment(p) for p in paths]
    ids = [Path(p).stem for p in paths]
    if len(segs) == 1:
        sig = signature_from_segment(segs[0], vuln_type, avs_id)
    else:
        dm = pairwise_distances(segs, ids)
        sig = extract_avs(segs, dm, vuln_type, avs_id=avs_id, ids=ids)
    return sig


def build(store_dir):
    store_dir = Path(store_dir)
    if store_dir.exists():
        shutil.rmtree(store_dir)
    store_dir.mkdir(parents=True)
    sigs = []

    # reentrancy-001/002: learned by clustering the labeled corpus at the
    # default dendrogram cutoff, exactly like `avscan learn` would.
    reent_dir = LEARN / "reentrancy"
    lsegs, lids = [], []
    for p in sorted(reent_dir.glob("*.sol")):
        for seg in segments_of(p):
            lsegs.append(seg)
            lids.append(p.stem)
    dm = pairwise_distances(lsegs, lids)
    groups = cluster(dm, 50)
    assert len(groups) == 2, groups
    by_id = dict(zip(lids, lsegs))
    for members in groups:
        if "CB03" in members:
            sig = extract_avs([by_id[m] for m in members], dm, "Reentrancy",
                              avs_id="reentrancy-002-regdocs", ids=members)
        else:
            sig = extract_avs([by_id[m] for m in members], dm, "Reentrancy",
                              avs_id="reentrancy-001-sale-core", ids=members)
        sigs.append(sig)

    # revert-001: the curated three-statement refund signature from CB1.
    cb1 = first_segment(fixture_dir() / "CB01.sol")
    full = signature_from_segment(cb1, "UnexpectedRevert", "revert-001-bid-refund")
    sigs.append(curate_avs(full, [1, 2, 3]))

    singles = [
        ("reentrancy-003-claims-escrow", "Reentrancy", ["reentrancy_extra/escrow_claims.sol"]),
        ("reentrancy-004-buy-first-tokens", "Reentrancy", ["reentrancy_extra/buy_first_tokens.sol"]),
        ("reentrancy-005-send-proportion", "Reentrancy", ["reentrancy_extra/send_eth_proportion.sol"]),
        ("reentrancy-006-withdraw-balance", "Reentrancy", ["reentrancy_extra/withdraw_balance.sol"]),
        ("reentrancy-007-withdraw-dividend", "Reentrancy", ["reentrancy_extra/withdraw_dividend.sol"]),
        ("reentrancy-008-cash-out", "Reentrancy", ["reentrancy_extra/cash_out.sol"]),
        ("reentrancy-009-pay-winner", "Reentrancy", ["reentrancy_extra/pay_winner.sol"]),
        ("reentrancy-010-claim-reward", "Reentrancy", ["reentrancy_extra/claim_reward.sol"]),
        ("reentrancy-011-forward-deposit", "Reentrancy", ["reentrancy_extra/forward_deposit.sol"]),
        ("reentrancy-012-release-funds", "Reentrancy", ["reentrancy_extra/release_funds.sol"]),
        ("reentrancy-013-sell-tokens", "Reentrancy",
         ["reentrancy_extra/sell_tokens_a.sol", "reentrancy_extra/sell_tokens_b.sol"]),
        ("reentrancy-014-jackpot-payout", "Reentrancy", ["reentrancy_extra/jackpot_payout.sol"]),
        ("reentrancy-015-refund-last", "Reentrancy", ["reentrancy_extra/refund_last.sol"]),
        ("reentrancy-016-redeem-burn", "Reentrancy", ["reentrancy_extra/redeem_and_burn.sol"]),
        ("reentrancy-017-move-vault", "Reentrancy", ["reentrancy_extra/move_vault.sol"]),
        ("reentrancy-018-reclaim-pledge", "Reentrancy", ["reentrancy_extra/reclaim_pledge.sol"]),
        ("reentrancy-019-settle-claim", "Reentrancy", ["reentrancy_extra/settle_claim.sol"]),
        ("reentrancy-020-rebate", "Reentrancy",
         ["reentrancy_extra/rebate_a.sol", "reentrancy_extra/rebate_b.sol"]),
        ("revert-002-split-profit", "UnexpectedRevert", ["revert/split_profit.sol"]),
        ("revert-003-pay-dividends", "UnexpectedRevert", ["revert/pay_dividends.sol"]),
        ("revert-004-refund-queue", "UnexpectedRevert", ["revert/refund_queue.sol"]),
        ("revert-005-outbid", "UnexpectedRevert", ["revert/outbid.sol"]),
        ("revert-006-flush-queue", "UnexpectedRevert", ["revert/flush_queue.sol"]),
        ("revert-007-refund-bid", "UnexpectedRevert", ["revert/refund_bid.sol"]),
        ("revert-008-distribute", "UnexpectedRevert", ["revert/distribute_shares.sol"]),
        ("txorigin-001-require-owner", "TxOriginAbuse", ["txorigin/origin_transfer.sol"]),
        ("txorigin-002-if-admin", "TxOriginAbuse", ["txorigin/origin_if_admin.sol"]),
        ("txorigin-003-assert", "TxOriginAbuse", ["txorigin/origin_assert.sol"]),
        ("txorigin-004-if-throw", "TxOriginAbuse", ["txorigin/origin_throw.sol"]),
        ("txorigin-005-invoker", "TxOriginAbuse", ["txorigin/origin_invoker.sol"]),
        ("lowlevel-001-call-loop", "UncheckedLowLevelCall", ["lowlevel/ping_all.sol"]),
        ("lowlevel-002-callcode-loop", "UncheckedLowLevelCall", ["lowlevel/mirror_callcode.sol"]),
        ("lowlevel-003-delegatecall-loop", "UncheckedLowLevelCall", ["lowlevel/fan_out.sol"]),
        ("lowlevel-004-send-loop", "UncheckedLowLevelCall", ["lowlevel/sweep_dust.sol"]),
        ("selfdestruct-001-plain", "SelfdestructAbuse", ["selfdestruct/kill_plain.sol"]),
        ("selfdestruct-002-owner-gate", "SelfdestructAbuse", ["selfdestruct/shutdown_owner.sol"]),
        ("selfdestruct-003-deadline", "SelfdestructAbuse", ["selfdestruct/expire_deadline.sol"]),
        ("selfdestruct-004-evacuate", "SelfdestructAbuse", ["selfdestruct/evacuate.sol"]),
        ("selfdestruct-005-reset", "SelfdestructAbuse", ["selfdestruct/reset_game.sol"]),
    ]
    for avs_id, vt, files in singles:
        sigs.append(learn_group([LEARN / f for f in files], vt, avs_id))

    for sig in sigs:
        save_avs(sig, store_dir)
    counts = {}
    for s in sigs:
        counts[s.vuln_type] = counts.get(s.vuln_type, 0) + 1
    print(f"wrote {len(sigs)} signatures to {store_dir}: {counts}")
    return sigs


EXPECTED_REPORTED = {
    ("CB01.sol", "Auction", "bid", "UnexpectedRevert"),
    ("CB02.sol", "AuctionPotato", "placeBid", "UnexpectedRevert"),
    ("CB12.sol", "Alice", "aliceClaimsPayment", "Reentrancy"),
}
EXPECTED_SUPPRESSED = {
    ("CB03.sol", "RegDocuments", "regstDocs", "Reentrancy", ("DM3",)),
    ("CB04.sol", "BancorLender", "closePosition", "Reentrancy", ("DM2",)),
    ("CB05.sol", "ZethrBankroll", "receiveDividends", "Reentrancy", ("DM4",)),
    ("CB06.sol", "PayoutDistributor", "Payout", "UnexpectedRevert", ("DM6",)),
    ("CB07.sol", "FairPlan", "withdraw", "UnexpectedRevert", ("DM7",)),
    ("CB08.sol", "DeedHolder", "destroyDeed", "SelfdestructAbuse", ("DM10",)),
}
TRIO_REPORTED = {
    ("CB09.sol", "TokenSaleA", "sellOnApprove", "Reentrancy"),
    ("CB10.sol", "TokenSaleB", "sellOnApprove", "Reentrancy"),
    ("CB11.sol", "TokenSaleC", "sellOnApprove", "Reentrancy"),
}


def report_sets(report):
    reported, suppressed = set(), set()
    for path, fnds, _ in report.files:
        name = Path(path).name
        for f in fnds:
            key = (name, f.contract, f.function, f.vuln_type)
            if f.reported:
                reported.add(key)
            else:
                suppressed.add(key + (tuple(f.suppressed_by),))
    return reported, suppressed


def verify(store_dir):
    from avscan.avs import load_store
    store = load_store(store_dir)
    assert len(store) == 42, len(store)

    rdr_paths = [fixture_dir() / f"CB{i:02d}.sol" for i in (1, 2, 3, 4, 5, 6, 7, 8, 12)]
    report = scan_paths(rdr_paths, store, MatchConfig())
    reported, suppressed = report_sets(report)
    ok = True
    if reported != EXPECTED_REPORTED:
        ok = False
        print("FIDELITY reported mismatch:")
        print("  extra:  ", sorted(reported - EXPECTED_REPORTED))
        print("  missing:", sorted(EXPECTED_REPORTED - reported))
    if suppressed != EXPECTED_SUPPRESSED:
        ok = False
        print("FIDELITY suppressed mismatch:")
        print("  extra:  ", sorted(suppressed - EXPECTED_SUPPRESSED))
        print("  missing:", sorted(EXPECTED_SUPPRESSED - suppressed))

    full_paths = [fixture_dir() / f"CB{i:02d}.sol" for i in range(1, 13)]
    report = scan_paths(full_paths, store, MatchConfig())
    reported, suppressed = report_sets(report)
    want_rep = EXPECTED_REPORTED | TRIO_REPORTED
    if reported != want_rep:
        ok = False
        print("FULL-CORPUS reported mismatch:")
        print("  extra:  ", sorted(reported - want_rep))
        print("  missing:", sorted(want_rep - reported))
    if suppressed != EXPECTED_SUPPRESSED:
        ok = False
        print("FULL-CORPUS suppressed mismatch:")
        print("  extra:  ", sorted(suppressed - EXPECTED_SUPPRESSED))
        print("  missing:", sorted(EXPECTED_SUPPRESSED - suppressed))
    print("verification:", "OK" if ok else "FAILED")
    return ok


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else bundled_store_dir()
    build(out)
    sys.exit(0 if verify(out) else 1)
