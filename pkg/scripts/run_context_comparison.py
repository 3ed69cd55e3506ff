#!/usr/bin/env python3
"""Train the reply-only baseline and the context-reading variants on one
corpus and compare per-class P/R/F1 on the test split.

This is the manual full-scale procedure: on a corpus of realistic size it
takes hours, so it is not part of the automated acceptance suite. The
expected qualitative outcome on a real conversation corpus is that the
context-reading variants (concat, conditional, sent_attn) beat reply_only
on S-class F1.
"""
import argparse

from convsarc.data import load_corpus, segment_instance, stratified_split
from convsarc.embeddings import load_embeddings
from convsarc.evaluate import format_table, prf1
from convsarc.models import TrainSettings, predict, train_model

DEFAULT_VARIANTS = ("reply_only", "concat", "conditional", "sent_attn")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--corpus", required=True)
    ap.add_argument("--embeddings", required=True)
    ap.add_argument("--embed-dim", type=int, required=True)
    ap.add_argument("--hidden-dim", type=int, default=None,
                    help="defaults to the embedding dimension")
    ap.add_argument("--variants", nargs="+", default=list(DEFAULT_VARIANTS))
    ap.add_argument("--epochs", type=int, default=30)
    ap.add_argument("--patience", type=int, default=10)
    ap.add_argument("--lr", type=float, default=0.05)
    ap.add_argument("--l2", type=float, default=1e-4)
    ap.add_argument("--dropout", type=float, default=0.5)
    ap.add_argument("--batch-size", type=int, default=16)
    ap.add_argument("--seed", type=int, default=13)
    args = ap.parse_args()

    instances = load_corpus(args.corpus)
    train, dev, test = stratified_split(instances, args.seed)
    table = load_embeddings(args.embeddings, args.embed_dim)
    hidden = args.hidden_dim or args.embed_dim

    rows = []
    for variant in args.variants:
        settings = TrainSettings(
            variant=variant, hidden_dim=hidden, lr=args.lr, l2=args.l2,
            dropout=args.dropout, batch_size=args.batch_size,
            epochs=args.epochs, patience=args.patience, seed=args.seed)
        result = train_model(train, dev, table, settings)
        preds = [predict(result.params, segment_instance(i), table)[0]
                 for i in test]
        metrics = prf1([i.label for i in test], preds)
        rows.append((variant, metrics))
        print(f"{variant}: trained {len(result.log)} epochs, "
              f"kept epoch {result.best_epoch}")

    print()
    print(format_table(rows))
    s_f1 = {name: m.per_class["S"].f1 for name, m in rows}
    if "reply_only" in s_f1:
        base = s_f1["reply_only"]
        better = [n for n, f in s_f1.items() if n != "reply_only" and f > base]
        print(f"\ncontext-reading variants beating reply_only on S-class F1: "
              f"{', '.join(better) if better else 'none'}")


if __name__ == "__main__":
    main()
