import { describe, expect, it } from "vitest";
import {
  DEFAULT_PAGE_SIZE,
  defaultFilters,
  filtersEqual,
  pageStateQuery,
  parseFilters,
  parsePageState,
  queueQuery,
  type QueueFilters,
} from "../src/urlstate.js";

describe("queueQuery", () => {
  it("omits defaults so plain views have a bare URL", () => {
    expect(queueQuery(defaultFilters()).toString()).toBe("");
  });

  it("serializes every non-default field", () => {
    const filters: QueueFilters = {
      status: "pending",
      label: "suspect_adverse",
      rule: "R4_identifiable_patient",
      page: 3,
      pageSize: 50,
    };
    expect(queueQuery(filters).toString()).toBe(
      "status=pending&label=suspect_adverse&rule=R4_identifiable_patient&page=3&page_size=50",
    );
  });
});

describe("parseFilters", () => {
  it("round-trips through the query string", () => {
    const cases: QueueFilters[] = [
      defaultFilters(),
      { status: "reviewed", page: 1, pageSize: DEFAULT_PAGE_SIZE },
      { label: "not_suspect", rule: "R5_default", page: 7, pageSize: 200 },
      { status: "pending", label: "suspect_adverse", page: 2, pageSize: 5 },
    ];
    for (const filters of cases) {
      const parsed = parseFilters(queueQuery(filters));
      expect(filtersEqual(parsed, filters)).toBe(true);
    }
  });

  it("drops values the server would reject", () => {
    const params = new URLSearchParams("status=bogus&label=nope&rule=R9_wat");
    const parsed = parseFilters(params);
    expect(parsed.status).toBeUndefined();
    expect(parsed.label).toBeUndefined();
    expect(parsed.rule).toBeUndefined();
  });

  it("clamps page and page_size into the served range", () => {
    expect(parseFilters(new URLSearchParams("page=0")).page).toBe(1);
    expect(parseFilters(new URLSearchParams("page=-3")).page).toBe(1);
    expect(parseFilters(new URLSearchParams("page=oops")).page).toBe(1);
    expect(parseFilters(new URLSearchParams("page_size=0")).pageSize).toBe(1);
    expect(parseFilters(new URLSearchParams("page_size=9999")).pageSize).toBe(200);
    expect(parseFilters(new URLSearchParams("")).pageSize).toBe(DEFAULT_PAGE_SIZE);
  });
});

describe("parsePageState", () => {
  it("carries the open article alongside the filters", () => {
    const state = parsePageState("?status=pending&article=SYN-000001");
    expect(state.filters.status).toBe("pending");
    expect(state.article).toBe("SYN-000001");
  });

  it("round-trips a full view", () => {
    const query = pageStateQuery({
      filters: { status: "pending", label: "suspect_adverse", page: 2, pageSize: 50 },
      article: "SYN-000007",
    });
    const state = parsePageState(query);
    expect(state.article).toBe("SYN-000007");
    expect(state.filters).toEqual({
      status: "pending",
      label: "suspect_adverse",
      rule: undefined,
      page: 2,
      pageSize: 50,
    });
  });

  it("renders the default view as an empty query", () => {
    expect(pageStateQuery({ filters: defaultFilters() })).toBe("");
  });
});
