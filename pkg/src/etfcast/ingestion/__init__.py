from .types import ArticleMeta, EtfId, PriceSeries, RawArticle, SectorMap
from .stores import NewsStore, PriceStore, url_hash
from .prices import FixturePriceSource, HttpPriceSource, fetch_prices
from .news import (
    FixtureNewsSource,
    HttpNewsSource,
    extract_body,
    fetch_article_body,
    harvest_bodies,
    list_articles,
)
from .sectors import load_sector_map

__all__ = [
    "ArticleMeta", "EtfId", "PriceSeries", "RawArticle", "SectorMap",
    "NewsStore", "PriceStore", "url_hash",
    "FixturePriceSource", "HttpPriceSource", "fetch_prices",
    "FixtureNewsSource", "HttpNewsSource", "extract_body",
    "fetch_article_body", "harvest_bodies", "list_articles",
    "load_sector_map",
]
