/** Thin client for the synthesis service. */

import type { Prediction, SynthesizeRequest, SynthesizeResponse } from "./logic.js";

export interface ApiInfo {
  name: string;
  family: string;
  description: string;
}

export interface ApplyResponse {
  v: number;
  results: Prediction[];
}

export class ServiceError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

async function postJson<T>(
  url: string,
  body: unknown,
  signal?: AbortSignal,
): Promise<T> {
  const response = await fetch(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
    signal,
  });
  const payload = await response.json().catch(() => ({}));
  if (!response.ok) {
    const detail = (payload as { error?: string }).error ?? response.statusText;
    throw new ServiceError(detail, response.status);
  }
  return payload as T;
}

export class Client {
  constructor(readonly baseUrl: string) {}

  synthesize(
    request: SynthesizeRequest,
    signal?: AbortSignal,
  ): Promise<SynthesizeResponse> {
    return postJson(`${this.baseUrl}/synthesize`, request, signal);
  }

  apply(
    program: string,
    inputs: string[],
    signal?: AbortSignal,
  ): Promise<ApplyResponse> {
    return postJson(`${this.baseUrl}/apply`, { v: 1, program, inputs }, signal);
  }

  async apis(family?: string): Promise<ApiInfo[]> {
    const suffix = family ? `?family=${encodeURIComponent(family)}` : "";
    const response = await fetch(`${this.baseUrl}/apis${suffix}`);
    if (!response.ok) {
      throw new ServiceError(response.statusText, response.status);
    }
    return (await response.json()) as ApiInfo[];
  }
}
