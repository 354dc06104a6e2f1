// Spawns the real engine server with a seeded fixture corpus for UI tests.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

const VOCAB = [
  "alpha", "basin", "cobalt", "delta", "ember", "fjord", "garnet", "harbor",
  "indigo", "jasper", "krill", "lumen", "marble", "nectar", "onyx", "prism",
  "quartz", "rhubarb", "sable", "tundra", "umber", "velvet", "willow", "xenon",
];

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function writeFixtureCorpus(count = 60, seed = 7): string {
  const rand = mulberry32(seed);
  const dir = mkdtempSync(join(tmpdir(), "corpusmap-ui-"));
  const path = join(dir, "fixture.jsonl");
  const lines: string[] = [];
  for (let i = 0; i < count; i++) {
    const length = 6 + Math.floor(rand() * 10);
    const words = Array.from(
      { length },
      () => VOCAB[Math.floor(rand() * VOCAB.length)],
    );
    lines.push(
      JSON.stringify({
        title: `Document ${i}`,
        url: `https://example.org/docs/${i}`,
        text: words.join(" "),
      }),
    );
  }
  writeFileSync(path, lines.join("\n") + "\n");
  return path;
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port assigned"));
        return;
      }
      const port = address.port;
      probe.close(() => resolve(port));
    });
  });
}

export interface FixtureServer {
  baseUrl: string;
  stop(): Promise<void>;
}

export async function startFixtureServer(): Promise<FixtureServer> {
  const corpus = writeFixtureCorpus();
  const port = await freePort();
  const child: ChildProcess = spawn(
    "python3",
    [
      "-m",
      "corpusmap.cli",
      "ingest",
      corpus,
      "--serve",
      `127.0.0.1:${port}`,
      "--dimension",
      "64",
      "--seed",
      "42",
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  let stderr = "";
  child.stderr?.on("data", (chunk) => {
    stderr += String(chunk);
  });

  const baseUrl = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 45_000;
  for (;;) {
    if (child.exitCode !== null) {
      throw new Error(`fixture server exited early (${child.exitCode}): ${stderr}`);
    }
    try {
      const response = await fetch(`${baseUrl}/maps`);
      if (response.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      child.kill("SIGKILL");
      throw new Error(`fixture server did not come up: ${stderr}`);
    }
    await new Promise((r) => setTimeout(r, 100));
  }

  return {
    baseUrl,
    stop: () =>
      new Promise<void>((resolve) => {
        child.once("exit", () => resolve());
        child.kill("SIGTERM");
        setTimeout(() => {
          if (child.exitCode === null) child.kill("SIGKILL");
        }, 3000).unref();
      }),
  };
}
