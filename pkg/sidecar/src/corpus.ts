/**
 * Minimal reader for the engine's corpus file format: JSON lines, one law per
 * line with { law_id, articles: [{ article_id, title, text }] }.
 */

import fs from "node:fs";

export interface CorpusArticle {
  id: string; // "<law_id>#<article_id>"
  combined: string;
}

export function combineTitleBody(title: string, body: string): string {
  if (title && body) return `${title} ${body}`;
  return title || body;
}

export function readCorpus(path: string): CorpusArticle[] {
  const articles: CorpusArticle[] = [];
  const seen = new Set<string>();
  const lines = fs.readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, index) => {
    if (!line.trim()) return;
    let record: any;
    try {
      record = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}:${index + 1}: invalid JSON (${err})`);
    }
    if (typeof record.law_id !== "string" || !Array.isArray(record.articles)) {
      throw new Error(`${path}:${index + 1}: expected { law_id, articles }`);
    }
    for (const raw of record.articles) {
      if (typeof raw.article_id !== "string") {
        throw new Error(`${path}:${index + 1}: article missing article_id`);
      }
      const id = `${record.law_id}#${raw.article_id}`;
      if (seen.has(id)) throw new Error(`${path}:${index + 1}: duplicate article ${id}`);
      seen.add(id);
      articles.push({ id, combined: combineTitleBody(raw.title ?? "", raw.text ?? "") });
    }
  });
  return articles;
}
